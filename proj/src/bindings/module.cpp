#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quesim/augment.hpp"
#include "quesim/features.hpp"
#include "quesim/graph.hpp"
#include "quesim/pipeline.hpp"
#include "quesim/secondary.hpp"
#include "quesim/serialize.hpp"
#include "quesim/text_prep.hpp"

namespace py = pybind11;
using namespace quesim;

namespace {

// Thin inference wrapper around a trained checkpoint.
class GruModel {
 public:
  explicit GruModel(const std::string& path) : model_(load_gru_file(path)) {}

  double score(const std::string& q1, const std::string& q2) const {
    const auto ids1 = encode(tokenize(q1), model_.vocab, model_.cfg.max_len);
    const auto ids2 = encode(tokenize(q2), model_.vocab, model_.cfg.max_len);
    return forward_pair(model_, ids1, ids2, false, nullptr).y_hat;
  }

  std::string nomenclature() const { return model_.cfg.nomenclature(); }
  std::size_t vocab_size() const { return model_.vocab.size(); }

 private:
  SiameseModel model_;
};

class PySecondary {
 public:
  explicit PySecondary(const std::string& path)
      : model_(load_secondary_file(path)) {}

  double predict(double gru_score, double word_match, double tfidf_match,
                 double common_dups) const {
    FeatureRow row;
    row.gru_score = gru_score;
    row.word_match = word_match;
    row.tfidf_match = tfidf_match;
    row.common_dups = common_dups;
    return model_.predict(row);
  }

  std::string kind() const { return classifier_kind_name(model_.kind); }

 private:
  SecondaryModel model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Duplicate-question detection: Siamese GRU plus secondary classifiers";

  m.def("tokenize", &tokenize, py::arg("text"),
        "Lowercase rule-based tokenization");
  m.def("encode_tokens",
        [](const TokenSeq& tokens, const std::vector<std::string>& vocab_words,
           std::size_t max_len) {
          Vocabulary vocab;
          for (const auto& w : vocab_words) vocab.add(w);
          return encode(tokens, vocab, max_len);
        },
        py::arg("tokens"), py::arg("vocab_words"), py::arg("max_len"),
        "Encode tokens against a word list (PAD/UNK are implicit)");
  m.def("length_histogram",
        [](const std::vector<TokenSeq>& corpus) {
          return length_histogram(corpus);
        },
        py::arg("corpus"));

  m.def("word_match_share",
        [](const TokenSeq& t1, const TokenSeq& t2) {
          return word_match_share(t1, t2, default_stopwords());
        },
        py::arg("tokens1"), py::arg("tokens2"));
  m.def("tfidf_word_match",
        [](const TokenSeq& t1, const TokenSeq& t2,
           const std::vector<TokenSeq>& corpus) {
          const auto idf = build_idf(corpus);
          return tfidf_word_match(t1, t2, idf, default_stopwords());
        },
        py::arg("tokens1"), py::arg("tokens2"), py::arg("corpus"),
        "TF-IDF weighted overlap with the IDF table built from `corpus`");

  py::class_<DuplicateGraph>(m, "DuplicateGraph")
      .def(py::init<>())
      .def("add_edge", &DuplicateGraph::add_edge)
      .def("common_dup_count", &DuplicateGraph::common_dup_count);

  m.def("log_loss", &log_loss, py::arg("probs"), py::arg("labels"));

  py::class_<GruModel>(m, "GruModel")
      .def(py::init<const std::string&>(), py::arg("checkpoint_path"))
      .def("score", &GruModel::score, py::arg("question1"), py::arg("question2"))
      .def_property_readonly("nomenclature", &GruModel::nomenclature)
      .def_property_readonly("vocab_size", &GruModel::vocab_size);

  py::class_<PySecondary>(m, "SecondaryModel")
      .def(py::init<const std::string&>(), py::arg("model_path"))
      .def("predict", &PySecondary::predict, py::arg("gru_score"),
           py::arg("word_match"), py::arg("tfidf_match"), py::arg("common_dups"))
      .def_property_readonly("kind", &PySecondary::kind);

  m.def("augment_csv", &stage_augment, py::arg("input_csv"), py::arg("seed"),
        py::arg("out_csv"));
  m.def("preprocess", &stage_preprocess, py::arg("input_csv"), py::arg("glove"),
        py::arg("embed_dim"), py::arg("max_len"), py::arg("out_dir"));
  m.def("evaluate",
        [](const std::string& features_csv, const std::string& model_path) {
          const auto r = stage_evaluate(features_csv, model_path);
          return py::make_tuple(r.loss, r.acc, r.rows);
        },
        py::arg("features_csv"), py::arg("model_path"),
        "Returns (log_loss, accuracy, rows)");
  m.def("run_all",
        [](const std::string& config_path, const std::string& work_dir) {
          PipelineConfig cfg = PipelineConfig::from_file(config_path);
          if (!work_dir.empty()) cfg.work_dir = work_dir;
          const auto manifest = run_all(cfg);
          py::list out;
          for (const auto& s : manifest.stages)
            out.append(py::make_tuple(s.stage, s.skipped, s.wall_ms));
          return out;
        },
        py::arg("config_path"), py::arg("work_dir") = std::string(),
        "Run the full pipeline; returns [(stage, skipped, wall_ms), ...]");
}
