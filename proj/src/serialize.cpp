#include "quesim/serialize.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "quesim/errors.hpp"

namespace quesim {

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

void write_i32(std::ostream& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

void write_str(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t read_u64(std::istream& in) {
  char buf[8];
  in.read(buf, 8);
  if (!in) throw DataError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

std::int32_t read_i32(std::istream& in) {
  char buf[4];
  in.read(buf, 4);
  if (!in) throw DataError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return static_cast<std::int32_t>(v);
}

double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_u64(in));
}

std::string read_str(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (1ULL << 32)) throw DataError("checkpoint: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw DataError("checkpoint: truncated file");
  return s;
}

void write_header(std::ostream& out, const std::string& kind) {
  out.write(kCheckpointMagic, 5);
  write_str(out, kind);
}

std::string read_header(std::istream& in) {
  char magic[5];
  in.read(magic, 5);
  if (!in || std::string(magic, 5) != kCheckpointMagic)
    throw DataError("checkpoint: bad magic (not a QSIM1 file)");
  return read_str(in);
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoull(item));
  return out;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

void save_gru(std::ostream& out, const SiameseModel& model) {
  write_header(out, "gru");
  std::string cfg;
  cfg += "embed_dim = " + std::to_string(model.cfg.embed_dim) + "\n";
  cfg += "max_len = " + std::to_string(model.cfg.max_len) + "\n";
  cfg += "hidden = " + join_sizes(model.cfg.hidden_sizes) + "\n";
  cfg += "head_hidden = " + join_sizes(model.cfg.head_hidden) + "\n";
  cfg += "keep_prob = " + fmt_g17(model.cfg.keep_prob) + "\n";
  cfg += std::string("join = ") + (model.cfg.join_diff_prod ? "diff_prod" : "concat") + "\n";
  cfg += std::string("freeze_embeddings = ") +
         (model.cfg.freeze_embeddings ? "true" : "false") + "\n";
  write_str(out, cfg);

  write_u64(out, model.vocab.size());
  for (const auto& w : model.vocab.words()) write_str(out, w);

  auto tensors = const_cast<SiameseModel&>(model).tensors();
  write_u64(out, tensors.size());
  for (const auto& t : tensors) {
    write_str(out, t.name);
    write_u64(out, t.rows);
    write_u64(out, t.cols);
    for (double v : t.data) write_f64(out, v);
  }
}

SiameseModel load_gru(std::istream& in) {
  if (read_header(in) != "gru")
    throw DataError("checkpoint: expected a gru model");
  const auto kv = parse_kv(read_str(in));
  ModelConfig cfg;
  cfg.embed_dim = std::stoull(kv.at("embed_dim"));
  cfg.max_len = std::stoull(kv.at("max_len"));
  cfg.hidden_sizes = parse_sizes(kv.at("hidden"));
  cfg.head_hidden = parse_sizes(kv.at("head_hidden"));
  cfg.keep_prob = std::stod(kv.at("keep_prob"));
  cfg.join_diff_prod = kv.at("join") == "diff_prod";
  cfg.freeze_embeddings = kv.at("freeze_embeddings") == "true";

  const std::uint64_t n_words = read_u64(in);
  EmbeddingStore store;
  store.dim = cfg.embed_dim;
  for (std::uint64_t i = 0; i < n_words; ++i) {
    const std::string w = read_str(in);
    if (i < 2) continue;  // PAD/UNK are implicit in a fresh vocabulary
    store.vocab.add(w);
  }
  if (store.vocab.size() != n_words)
    throw DataError("checkpoint: duplicate vocabulary entries");
  store.values = Matrix(n_words, cfg.embed_dim);

  SiameseModel model = SiameseModel::init(cfg, store, 0);
  auto tensors = model.tensors();
  const std::uint64_t n_tensors = read_u64(in);
  if (n_tensors != tensors.size())
    throw DataError("checkpoint: tensor count mismatch");
  for (auto& t : tensors) {
    const std::string name = read_str(in);
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    if (name != t.name || rows != t.rows || cols != t.cols)
      throw DataError("checkpoint: tensor layout mismatch at " + name);
    for (double& v : t.data) v = read_f64(in);
  }
  return model;
}

void save_gru_file(const std::string& path, const SiameseModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_gru(out, model);
}

SiameseModel load_gru_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_gru(in);
}

const char* classifier_kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRandomForest: return "rf";
    case ClassifierKind::kAdaBoost: return "ada";
    case ClassifierKind::kSvm: return "svm";
  }
  return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
  if (name == "rf") return ClassifierKind::kRandomForest;
  if (name == "ada") return ClassifierKind::kAdaBoost;
  if (name == "svm") return ClassifierKind::kSvm;
  throw ConfigError("unknown classifier kind '" + name + "' (use rf|ada|svm)");
}

double SecondaryModel::predict(const FeatureRow& row) const {
  switch (kind) {
    case ClassifierKind::kRandomForest: return rf_predict(forest, row);
    case ClassifierKind::kAdaBoost: return ada_predict(ada, row);
    case ClassifierKind::kSvm: return svm_predict(svm, row);
  }
  return 0.5;
}

void save_secondary(std::ostream& out, const SecondaryModel& model) {
  write_header(out, classifier_kind_name(model.kind));
  switch (model.kind) {
    case ClassifierKind::kRandomForest: {
      std::string cfg;
      cfg += "n_trees = " + std::to_string(model.forest.n_trees) + "\n";
      cfg += "features_per_split = " + std::to_string(model.forest.features_per_split) + "\n";
      cfg += "max_depth = " + std::to_string(model.forest.max_depth) + "\n";
      cfg += "seed = " + std::to_string(model.forest.seed) + "\n";
      write_str(out, cfg);
      write_u64(out, model.forest.trees.size());
      for (const auto& tree : model.forest.trees) {
        write_u64(out, tree.max_depth);
        write_u64(out, tree.nodes.size());
        for (const auto& n : tree.nodes) {
          write_i32(out, n.feature);
          write_f64(out, n.threshold);
          write_i32(out, n.left);
          write_i32(out, n.right);
          write_f64(out, n.positive_fraction);
          write_u64(out, n.samples);
        }
      }
      break;
    }
    case ClassifierKind::kAdaBoost: {
      write_str(out, "rounds = " + std::to_string(model.ada.stumps.size()) + "\n");
      write_u64(out, model.ada.stumps.size());
      for (std::size_t i = 0; i < model.ada.stumps.size(); ++i) {
        const auto& s = model.ada.stumps[i];
        write_i32(out, s.feature);
        write_f64(out, s.threshold);
        write_f64(out, s.left_vote);
        write_f64(out, s.right_vote);
        write_f64(out, model.ada.alphas[i]);
      }
      break;
    }
    case ClassifierKind::kSvm: {
      write_str(out, "kind = pegasos_platt\n");
      for (double v : model.svm.w) write_f64(out, v);
      write_f64(out, model.svm.b);
      write_f64(out, model.svm.platt_a);
      write_f64(out, model.svm.platt_b);
      for (double v : model.svm.mean) write_f64(out, v);
      for (double v : model.svm.stddev) write_f64(out, v);
      break;
    }
  }
}

SecondaryModel load_secondary(std::istream& in) {
  SecondaryModel model;
  const std::string kind = read_header(in);
  try {
    model.kind = classifier_kind_from_name(kind);
  } catch (const ConfigError&) {
    throw DataError("not a secondary classifier model (kind tag '" + kind +
                    "')");
  }
  const std::string cfg_text = read_str(in);
  switch (model.kind) {
    case ClassifierKind::kRandomForest: {
      const auto kv = parse_kv(cfg_text);
      model.forest.n_trees = std::stoull(kv.at("n_trees"));
      model.forest.features_per_split = std::stoull(kv.at("features_per_split"));
      model.forest.max_depth = std::stoull(kv.at("max_depth"));
      model.forest.seed = std::stoull(kv.at("seed"));
      const std::uint64_t n_trees = read_u64(in);
      for (std::uint64_t t = 0; t < n_trees; ++t) {
        DecisionTree tree;
        tree.max_depth = read_u64(in);
        const std::uint64_t n_nodes = read_u64(in);
        for (std::uint64_t i = 0; i < n_nodes; ++i) {
          TreeNode n;
          n.feature = read_i32(in);
          n.threshold = read_f64(in);
          n.left = read_i32(in);
          n.right = read_i32(in);
          n.positive_fraction = read_f64(in);
          n.samples = read_u64(in);
          tree.nodes.push_back(n);
        }
        model.forest.trees.push_back(std::move(tree));
      }
      break;
    }
    case ClassifierKind::kAdaBoost: {
      const std::uint64_t n = read_u64(in);
      for (std::uint64_t i = 0; i < n; ++i) {
        Stump s;
        s.feature = read_i32(in);
        s.threshold = read_f64(in);
        s.left_vote = read_f64(in);
        s.right_vote = read_f64(in);
        model.ada.stumps.push_back(s);
        model.ada.alphas.push_back(read_f64(in));
      }
      break;
    }
    case ClassifierKind::kSvm: {
      for (double& v : model.svm.w) v = read_f64(in);
      model.svm.b = read_f64(in);
      model.svm.platt_a = read_f64(in);
      model.svm.platt_b = read_f64(in);
      for (double& v : model.svm.mean) v = read_f64(in);
      for (double& v : model.svm.stddev) v = read_f64(in);
      break;
    }
  }
  return model;
}

void save_secondary_file(const std::string& path, const SecondaryModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_secondary(out, model);
}

SecondaryModel load_secondary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_secondary(in);
}

}  // namespace quesim
