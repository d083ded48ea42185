#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "quesim/gru.hpp"
#include "quesim/serialize.hpp"
#include "quesim/train.hpp"

namespace quesim {

/// key=value text with [section] headers; '#' and ';' start comments.
/// Returned keys are "section.key".
std::map<std::string, std::string> parse_ini(std::istream& in);
std::map<std::string, std::string> parse_ini_file(const std::string& path);

struct SecondaryOptions {
  ClassifierKind kind = ClassifierKind::kRandomForest;
  ForestOptions forest;
  std::size_t ada_rounds = 100;
  SvmOptions svm;
};

struct PipelineConfig {
  std::string train_csv;
  std::string test_csv;
  std::string glove_path;
  std::string work_dir;
  std::string stopwords_path;  // empty -> built-in list

  ModelConfig model;
  TrainConfig train;
  std::uint64_t augment_seed = 0;
  SecondaryOptions secondary;

  static PipelineConfig from_file(const std::string& path);
  static PipelineConfig from_ini(const std::map<std::string, std::string>& kv,
                                 const std::string& base_dir);

  std::string work_path(const std::string& name) const;
};

struct StageRecord {
  std::string stage;
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // path -> digest
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  bool skipped = false;
};

struct RunManifest {
  std::vector<StageRecord> stages;
};

// ---- individual stages (shared by the CLI subcommands and run_all) ----

/// Tokenizes a pair CSV against the GloVe vocabulary and writes the cache:
/// vocab.txt, q1.ids / q2.ids (one line per row, unpadded token ids) and
/// meta.txt into `out_dir`.
void stage_preprocess(const std::string& input_csv, const std::string& glove,
                      std::size_t embed_dim, std::size_t max_len,
                      const std::string& out_dir);

/// Length histogram over a token cache directory, (length, count) ascending.
std::vector<std::pair<std::size_t, std::size_t>> token_cache_histogram(
    const std::string& cache_dir);

void stage_augment(const std::string& input_csv, std::uint64_t seed,
                   const std::string& out_csv);

void stage_train_gru(const std::string& data_csv, const PipelineConfig& cfg,
                     const std::string& out_ckpt);

void stage_featurize(const std::string& data_csv, const std::string& gru_ckpt,
                     const std::string& train_csv,
                     const std::string& stopwords_path,
                     const std::string& out_csv);

void stage_train_secondary(const std::string& features_csv,
                           const SecondaryOptions& opt,
                           const std::string& out_model);

struct EvalResult {
  double loss = 0.0;
  double acc = 0.0;
  std::size_t rows = 0;
};
EvalResult stage_evaluate(const std::string& features_csv,
                          const std::string& model_path);

/// Writes `test_id,is_duplicate` probabilities for the config's test CSV.
void stage_predict(const PipelineConfig& cfg, const std::string& gru_ckpt,
                   const std::string& secondary_model,
                   const std::string& out_csv);

/// preprocess -> augment -> train-gru -> featurize -> train-secondary ->
/// predict, skipping stages whose recorded input and output digests still
/// match. Augmented data feeds only the GRU trainer; the secondary
/// classifier trains on features of the original pairs.
RunManifest run_all(const PipelineConfig& cfg);

}  // namespace quesim
