// quesim: duplicate-question pipeline driver.
// Exit codes: 0 success, 1 usage error, 2 data/numeric error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "quesim/errors.hpp"
#include "quesim/pipeline.hpp"

namespace {

using quesim::PipelineConfig;

// Reads the optional --config file, then lets explicit flags override it.
struct ConfigFlag {
  std::string path;

  PipelineConfig load() const {
    return path.empty() ? PipelineConfig{} : PipelineConfig::from_file(path);
  }
};

int run(int argc, char** argv) {
  CLI::App app{"quesim: Siamese GRU + secondary-classifier duplicate question pipeline"};
  app.require_subcommand(1);

  // preprocess
  auto* preprocess = app.add_subcommand(
      "preprocess", "Tokenize a pair CSV and write the token-id cache");
  std::string pp_input, pp_glove, pp_out;
  std::size_t pp_dim = 50, pp_max_len = 40;
  preprocess->add_option("--input", pp_input, "pair CSV")->required();
  preprocess->add_option("--glove", pp_glove, "GloVe text file")->required();
  preprocess->add_option("--dim", pp_dim, "embedding dimension (default 50)");
  preprocess->add_option("--max-len", pp_max_len, "sentence length (default 40)");
  preprocess->add_option("--out", pp_out, "output directory")->required();

  // stats
  auto* stats = app.add_subcommand(
      "stats", "Print the sentence-length histogram of a token cache");
  std::string st_tokens;
  stats->add_option("--tokens", st_tokens, "token cache directory")->required();

  // augment
  auto* augment = app.add_subcommand(
      "augment", "Flip, self-pair and balance a labeled training CSV");
  std::string ag_input, ag_out;
  std::uint64_t ag_seed = 0;
  augment->add_option("--input", ag_input, "training CSV")->required();
  augment->add_option("--seed", ag_seed, "sampling seed");
  augment->add_option("--out", ag_out, "output CSV")->required();

  // train-gru
  auto* train_gru = app.add_subcommand("train-gru", "Train the Siamese GRU");
  std::string tg_data, tg_glove, tg_config, tg_out;
  std::uint64_t tg_seed = 0;
  bool tg_seed_set = false;
  train_gru->add_option("--data", tg_data, "training CSV (typically augmented)")
      ->required();
  train_gru->add_option("--glove", tg_glove, "GloVe text file");
  train_gru->add_option("--config", tg_config, "pipeline config file");
  train_gru->add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { tg_seed = v; tg_seed_set = true; },
      "training seed (overrides config)");
  train_gru->add_option("--out", tg_out, "checkpoint path")->required();

  // featurize
  auto* featurize = app.add_subcommand(
      "featurize", "Compute GRU score + hand features for a pair CSV");
  std::string fz_data, fz_model, fz_train, fz_stopwords, fz_out;
  featurize->add_option("--data", fz_data, "pair CSV to featurize")->required();
  featurize->add_option("--model", fz_model, "GRU checkpoint")->required();
  featurize->add_option("--train-data", fz_train,
                        "original training CSV (graph + IDF source)")
      ->required();
  featurize->add_option("--stopwords", fz_stopwords, "stopword file (one per line)");
  featurize->add_option("--out", fz_out, "features CSV")->required();

  // train-secondary
  auto* train_secondary = app.add_subcommand(
      "train-secondary", "Fit a secondary classifier on a features CSV");
  std::string ts_features, ts_kind = "rf", ts_out;
  quesim::SecondaryOptions ts_opt;
  train_secondary->add_option("--features", ts_features, "features CSV")->required();
  train_secondary->add_option("--kind", ts_kind, "rf|ada|svm (default rf)");
  train_secondary->add_option("--n-trees", ts_opt.forest.n_trees, "forest size");
  train_secondary->add_option("--max-depth", ts_opt.forest.max_depth, "tree depth cap");
  train_secondary->add_option("--features-per-split", ts_opt.forest.features_per_split,
                              "features sampled per split");
  train_secondary->add_option("--rounds", ts_opt.ada_rounds, "AdaBoost rounds");
  train_secondary->add_option("--lambda", ts_opt.svm.lambda, "SVM regularization");
  train_secondary->add_option("--epochs", ts_opt.svm.epochs, "SVM epochs");
  std::uint64_t ts_seed = 0;
  train_secondary->add_option("--seed", ts_seed, "fitting seed");
  train_secondary->add_option("--out", ts_out, "model path")->required();

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Log loss and accuracy of a secondary model on labeled features");
  std::string ev_features, ev_model;
  evaluate->add_option("--features", ev_features, "labeled features CSV")->required();
  evaluate->add_option("--model", ev_model, "secondary model")->required();

  // predict
  auto* predict = app.add_subcommand(
      "predict", "Write a test_id,is_duplicate submission for the test CSV");
  std::string pr_config, pr_gru, pr_secondary, pr_out, pr_test, pr_train, pr_glove;
  predict->add_option("--config", pr_config, "pipeline config file");
  predict->add_option("--test", pr_test, "test CSV (overrides config)");
  predict->add_option("--train-data", pr_train, "training CSV (overrides config)");
  predict->add_option("--gru", pr_gru, "GRU checkpoint")->required();
  predict->add_option("--secondary", pr_secondary, "secondary model")->required();
  predict->add_option("--out", pr_out, "submission CSV")->required();

  // run-all
  auto* run_all_cmd = app.add_subcommand(
      "run-all", "Run preprocess -> augment -> train-gru -> featurize -> "
                 "train-secondary -> predict with digest-based skipping");
  std::string ra_config, ra_work;
  run_all_cmd->add_option("--config", ra_config, "pipeline config file")->required();
  run_all_cmd->add_option("--work-dir", ra_work, "work directory (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*preprocess) {
      quesim::stage_preprocess(pp_input, pp_glove, pp_dim, pp_max_len, pp_out);
      std::cout << "token cache written to " << pp_out << '\n';
    } else if (*stats) {
      for (const auto& [length, count] : quesim::token_cache_histogram(st_tokens))
        std::cout << length << '\t' << count << '\n';
    } else if (*augment) {
      quesim::stage_augment(ag_input, ag_seed, ag_out);
      std::cout << "augmented dataset written to " << ag_out << '\n';
    } else if (*train_gru) {
      PipelineConfig cfg = tg_config.empty() ? PipelineConfig{}
                                             : PipelineConfig::from_file(tg_config);
      if (!tg_glove.empty()) cfg.glove_path = tg_glove;
      if (cfg.glove_path.empty())
        throw quesim::ConfigError("train-gru: --glove or a config glove path is required");
      if (tg_seed_set) cfg.train.seed = tg_seed;
      quesim::stage_train_gru(tg_data, cfg, tg_out);
      std::cout << "checkpoint written to " << tg_out << '\n';
    } else if (*featurize) {
      quesim::stage_featurize(fz_data, fz_model, fz_train, fz_stopwords, fz_out);
      std::cout << "features written to " << fz_out << '\n';
    } else if (*train_secondary) {
      ts_opt.kind = quesim::classifier_kind_from_name(ts_kind);
      ts_opt.forest.seed = ts_seed;
      ts_opt.svm.seed = ts_seed;
      quesim::stage_train_secondary(ts_features, ts_opt, ts_out);
      std::cout << "model written to " << ts_out << '\n';
    } else if (*evaluate) {
      const auto result = quesim::stage_evaluate(ev_features, ev_model);
      std::printf("log_loss %.17g\naccuracy %.17g\nrows %zu\n", result.loss,
                  result.acc, result.rows);
    } else if (*predict) {
      PipelineConfig cfg = pr_config.empty() ? PipelineConfig{}
                                             : PipelineConfig::from_file(pr_config);
      if (!pr_test.empty()) cfg.test_csv = pr_test;
      if (!pr_train.empty()) cfg.train_csv = pr_train;
      if (cfg.test_csv.empty() || cfg.train_csv.empty())
        throw quesim::ConfigError(
            "predict: test and training CSVs are required (flags or config)");
      quesim::stage_predict(cfg, pr_gru, pr_secondary, pr_out);
      std::cout << "submission written to " << pr_out << '\n';
    } else if (*run_all_cmd) {
      PipelineConfig cfg = PipelineConfig::from_file(ra_config);
      if (!ra_work.empty()) cfg.work_dir = ra_work;
      const auto manifest = quesim::run_all(cfg);
      for (const auto& stage : manifest.stages)
        std::printf("%-16s %s (%.1f ms)\n", stage.stage.c_str(),
                    stage.skipped ? "skipped" : "ran", stage.wall_ms);
    }
  } catch (const quesim::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
