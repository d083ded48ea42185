#include "quesim/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quesim/augment.hpp"
#include "quesim/csv.hpp"
#include "quesim/digest.hpp"
#include "quesim/errors.hpp"
#include "quesim/features.hpp"
#include "quesim/text_prep.hpp"

namespace fs = std::filesystem;

namespace quesim {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::map<std::string, std::string> parse_ini(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    // inline comments: '#' or ';' preceded by whitespace ends the value
    for (std::size_t i = 1; i < value.size(); ++i) {
      if ((value[i] == '#' || value[i] == ';') &&
          (value[i - 1] == ' ' || value[i - 1] == '\t')) {
        value = trim(value.substr(0, i));
        break;
      }
    }
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_ini(in);
}

namespace {

template <typename T>
T get_or(const std::map<std::string, std::string>& kv, const std::string& key,
         T fallback);

template <>
std::string get_or(const std::map<std::string, std::string>& kv,
                   const std::string& key, std::string fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

template <>
std::size_t get_or(const std::map<std::string, std::string>& kv,
                   const std::string& key, std::size_t fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoull(it->second);
}

template <>
double get_or(const std::map<std::string, std::string>& kv,
              const std::string& key, double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

template <>
bool get_or(const std::map<std::string, std::string>& kv,
            const std::string& key, bool fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  return it->second == "true" || it->second == "1" || it->second == "yes";
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(std::stoull(trim(item)));
  return out;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty()) return path;
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).string();
}

}  // namespace

PipelineConfig PipelineConfig::from_ini(
    const std::map<std::string, std::string>& kv, const std::string& base_dir) {
  PipelineConfig cfg;
  cfg.train_csv = resolve(base_dir, get_or<std::string>(kv, "paths.train", ""));
  cfg.test_csv = resolve(base_dir, get_or<std::string>(kv, "paths.test", ""));
  cfg.glove_path = resolve(base_dir, get_or<std::string>(kv, "paths.glove", ""));
  cfg.work_dir = resolve(base_dir, get_or<std::string>(kv, "paths.work_dir", ""));
  cfg.stopwords_path =
      resolve(base_dir, get_or<std::string>(kv, "paths.stopwords", ""));

  cfg.model.embed_dim = get_or<std::size_t>(kv, "model.embed_dim", 50);
  cfg.model.max_len = get_or<std::size_t>(kv, "model.max_len", 40);
  if (kv.count("model.hidden"))
    cfg.model.hidden_sizes = parse_size_list(kv.at("model.hidden"));
  if (kv.count("model.head"))
    cfg.model.head_hidden = parse_size_list(kv.at("model.head"));
  cfg.model.keep_prob = get_or<double>(kv, "model.keep_prob", 0.8);
  cfg.model.join_diff_prod =
      get_or<std::string>(kv, "model.join", "diff_prod") == "diff_prod";
  cfg.model.freeze_embeddings = get_or<bool>(kv, "model.freeze_embeddings", false);

  cfg.train.batch_size = get_or<std::size_t>(kv, "train.batch_size", 32);
  cfg.train.epochs = get_or<std::size_t>(kv, "train.epochs", 10);
  cfg.train.seed = get_or<std::uint64_t>(kv, "train.seed", 0);
  cfg.train.lr = get_or<double>(kv, "train.lr", 1e-3);
  cfg.train.keep_prob = get_or<double>(kv, "train.keep_prob", cfg.model.keep_prob);
  cfg.train.clip_norm = get_or<double>(kv, "train.clip_norm", 5.0);
  cfg.train.dev_fraction = get_or<double>(kv, "train.dev_fraction", 0.1);

  cfg.augment_seed = get_or<std::uint64_t>(kv, "augment.seed", 0);

  cfg.secondary.kind =
      classifier_kind_from_name(get_or<std::string>(kv, "secondary.kind", "rf"));
  cfg.secondary.forest.n_trees = get_or<std::size_t>(kv, "secondary.n_trees", 100);
  cfg.secondary.forest.max_depth = get_or<std::size_t>(kv, "secondary.max_depth", 8);
  cfg.secondary.forest.features_per_split =
      get_or<std::size_t>(kv, "secondary.features_per_split", 2);
  cfg.secondary.forest.seed = get_or<std::uint64_t>(kv, "secondary.seed", 0);
  cfg.secondary.ada_rounds = get_or<std::size_t>(kv, "secondary.ada_rounds", 100);
  cfg.secondary.svm.lambda = get_or<double>(kv, "secondary.svm_lambda", 1e-4);
  cfg.secondary.svm.epochs = get_or<std::size_t>(kv, "secondary.svm_epochs", 20);
  cfg.secondary.svm.seed = cfg.secondary.forest.seed;
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  const auto kv = parse_ini_file(path);
  return from_ini(kv, fs::path(path).parent_path().string());
}

std::string PipelineConfig::work_path(const std::string& name) const {
  return (fs::path(work_dir) / name).string();
}

// ---------------------------------------------------------------- stages

void stage_preprocess(const std::string& input_csv, const std::string& glove,
                      std::size_t embed_dim, std::size_t max_len,
                      const std::string& out_dir) {
  if (max_len == 0) throw ConfigError("preprocess: max-len must be >= 1");
  const auto pairs = read_pairs_csv_file(input_csv);

  std::vector<TokenSeq> q1_tokens, q2_tokens;
  std::unordered_set<std::string> corpus_vocab;
  for (const auto& p : pairs) {
    q1_tokens.push_back(tokenize(p.q1_text));
    q2_tokens.push_back(tokenize(p.q2_text));
    for (const auto& w : q1_tokens.back()) corpus_vocab.insert(w);
    for (const auto& w : q2_tokens.back()) corpus_vocab.insert(w);
  }
  const auto store = load_glove_file(glove, embed_dim, corpus_vocab);

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "vocab.txt", std::ios::binary);
    for (const auto& w : store.vocab.words()) out << w << '\n';
  }
  auto write_ids = [&](const char* name, const std::vector<TokenSeq>& tokens) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    for (const auto& seq : tokens) {
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out << ' ';
        out << store.vocab.id_of(seq[i]);
      }
      out << '\n';
    }
  };
  write_ids("q1.ids", q1_tokens);
  write_ids("q2.ids", q2_tokens);
  {
    std::ofstream out(fs::path(out_dir) / "meta.txt", std::ios::binary);
    out << "max_len = " << max_len << '\n'
        << "rows = " << pairs.size() << '\n'
        << "vocab_size = " << store.vocab.size() << '\n';
  }
}

std::vector<std::pair<std::size_t, std::size_t>> token_cache_histogram(
    const std::string& cache_dir) {
  std::map<std::size_t, std::size_t> hist;
  for (const char* name : {"q1.ids", "q2.ids"}) {
    std::ifstream in(fs::path(cache_dir) / name);
    if (!in) throw DataError("stats: cannot open " + (fs::path(cache_dir) / name).string());
    std::string line;
    while (std::getline(in, line)) {
      std::size_t count = 0;
      std::stringstream ss(line);
      std::string tok;
      while (ss >> tok) ++count;
      ++hist[count];
    }
  }
  return {hist.begin(), hist.end()};
}

void stage_augment(const std::string& input_csv, std::uint64_t seed,
                   const std::string& out_csv) {
  const auto pairs = read_pairs_csv_file(input_csv);
  const auto augmented = augment_all(pairs, seed);
  std::vector<std::string> tags;
  tags.reserve(augmented.provenance.size());
  for (auto p : augmented.provenance) tags.push_back(provenance_name(p));
  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw DataError("cannot write " + out_csv);
  write_pairs_csv(out, augmented.pairs, tags);
  if (augmented.negative_shortfall > 0)
    std::fprintf(stderr,
                 "augment: %zu negative samples short of exact balance\n",
                 augmented.negative_shortfall);
}

void stage_train_gru(const std::string& data_csv, const PipelineConfig& cfg,
                     const std::string& out_ckpt) {
  const auto pairs = read_pairs_csv_file(data_csv);
  std::unordered_set<std::string> corpus_vocab;
  for (const auto& p : pairs) {
    for (const auto& w : tokenize(p.q1_text)) corpus_vocab.insert(w);
    for (const auto& w : tokenize(p.q2_text)) corpus_vocab.insert(w);
  }
  const auto store =
      load_glove_file(cfg.glove_path, cfg.model.embed_dim, corpus_vocab);
  SiameseModel model = SiameseModel::init(cfg.model, store, cfg.train.seed);
  const auto data = encode_pairs(pairs, model.vocab, cfg.model.max_len);
  train(model, data, cfg.train);
  save_gru_file(out_ckpt, model);
}

void stage_featurize(const std::string& data_csv, const std::string& gru_ckpt,
                     const std::string& train_csv,
                     const std::string& stopwords_path,
                     const std::string& out_csv) {
  const auto pairs = read_pairs_csv_file(data_csv);
  const auto model = load_gru_file(gru_ckpt);
  const auto train_pairs = read_pairs_csv_file(train_csv);
  auto stopwords = stopwords_path.empty() ? default_stopwords()
                                          : load_stopwords(stopwords_path);
  const auto ctx = FeatureContext::build(train_pairs, std::move(stopwords));
  const auto rows = featurize(pairs, model, ctx);
  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw DataError("cannot write " + out_csv);
  write_features_csv(out, rows);
}

void stage_train_secondary(const std::string& features_csv,
                           const SecondaryOptions& opt,
                           const std::string& out_model) {
  const auto rows = read_features_csv_file(features_csv);
  SecondaryModel model;
  model.kind = opt.kind;
  switch (opt.kind) {
    case ClassifierKind::kRandomForest:
      model.forest = rf_fit(rows, opt.forest);
      break;
    case ClassifierKind::kAdaBoost:
      model.ada = ada_fit(rows, opt.ada_rounds);
      break;
    case ClassifierKind::kSvm:
      model.svm = svm_fit(rows, opt.svm);
      break;
  }
  save_secondary_file(out_model, model);
}

EvalResult stage_evaluate(const std::string& features_csv,
                          const std::string& model_path) {
  const auto rows = read_features_csv_file(features_csv);
  const auto model = load_secondary_file(model_path);
  std::vector<double> probs;
  std::vector<int> labels;
  for (const auto& r : rows) {
    if (!r.label)
      throw DataError("evaluate: unlabeled row id=" + std::to_string(r.id));
    probs.push_back(model.predict(r));
    labels.push_back(*r.label);
  }
  EvalResult result;
  result.rows = rows.size();
  result.loss = log_loss(probs, labels);
  result.acc = accuracy(probs, labels);
  return result;
}

void stage_predict(const PipelineConfig& cfg, const std::string& gru_ckpt,
                   const std::string& secondary_model,
                   const std::string& out_csv) {
  const auto test_pairs = read_pairs_csv_file(cfg.test_csv);
  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw DataError("cannot write " + out_csv);
  out << "test_id,is_duplicate\n";
  if (test_pairs.empty()) return;

  const auto model = load_gru_file(gru_ckpt);
  const auto secondary = load_secondary_file(secondary_model);
  const auto train_pairs = read_pairs_csv_file(cfg.train_csv);
  auto stopwords = cfg.stopwords_path.empty()
                       ? default_stopwords()
                       : load_stopwords(cfg.stopwords_path);
  const auto ctx = FeatureContext::build(train_pairs, std::move(stopwords));
  const auto rows = featurize(test_pairs, model, ctx);
  if (rows.size() != test_pairs.size())
    throw DataError("predict: produced " + std::to_string(rows.size()) +
                    " rows for " + std::to_string(test_pairs.size()) +
                    " test pairs");
  for (const auto& r : rows)
    out << r.id << ',' << fmt_g17(secondary.predict(r)) << '\n';
}

// ---------------------------------------------------------------- run_all

namespace {

using nlohmann::json;

json record_to_json(const StageRecord& r) {
  return json{{"stage", r.stage},   {"inputs", r.inputs},
              {"outputs", r.outputs}, {"seed", r.seed},
              {"wall_ms", r.wall_ms}, {"skipped", r.skipped}};
}

StageRecord record_from_json(const json& j) {
  StageRecord r;
  r.stage = j.at("stage").get<std::string>();
  r.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.skipped = j.value("skipped", false);
  return r;
}

std::map<std::string, StageRecord> load_manifest_map(const std::string& path) {
  std::map<std::string, StageRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  json j;
  try {
    in >> j;
    for (const auto& item : j) {
      StageRecord r = record_from_json(item);
      out[r.stage] = r;  // latest record per stage wins
    }
  } catch (const json::exception& e) {
    throw DataError("manifest: cannot parse " + path + ": " + e.what());
  }
  return out;
}

void append_manifest(const std::string& path, const StageRecord& r) {
  json j = json::array();
  {
    std::ifstream in(path);
    if (in) {
      try {
        in >> j;
      } catch (const json::exception&) {
        j = json::array();
      }
    }
  }
  j.push_back(record_to_json(r));
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
}

}  // namespace

RunManifest run_all(const PipelineConfig& cfg) {
  if (cfg.work_dir.empty()) throw ConfigError("run-all: work_dir is required");
  fs::create_directories(cfg.work_dir);
  const std::string manifest_path = cfg.work_path("manifest.json");
  auto previous = load_manifest_map(manifest_path);

  const std::string tokens_dir = cfg.work_path("tokens");
  const std::string augmented_csv = cfg.work_path("augmented.csv");
  const std::string gru_ckpt = cfg.work_path("gru.ckpt");
  const std::string features_csv = cfg.work_path("features.csv");
  const std::string secondary_model = cfg.work_path("secondary.model");
  const std::string submission_csv = cfg.work_path("submission.csv");

  RunManifest manifest;
  // once any stage runs, everything downstream of it runs too, even when a
  // deterministic rerun happened to reproduce the same bytes
  bool upstream_ran = false;

  auto run_stage = [&](const std::string& name,
                       const std::vector<std::string>& inputs,
                       const std::vector<std::string>& outputs,
                       std::uint64_t seed, auto&& body) {
    StageRecord rec;
    rec.stage = name;
    rec.seed = seed;
    for (const auto& path : inputs) {
      try {
        rec.inputs[path] = file_digest(path);
      } catch (const DataError& e) {
        throw DataError("stage " + name + ": " + e.what());
      }
    }

    auto it = previous.find(name);
    const bool inputs_match = it != previous.end() && it->second.inputs == rec.inputs;
    bool outputs_exist = true;
    for (const auto& path : outputs)
      if (!fs::exists(path)) outputs_exist = false;

    if (inputs_match && outputs_exist && !upstream_ran) {
      for (const auto& path : outputs) {
        const std::string digest = file_digest(path);
        auto out_it = it->second.outputs.find(path);
        if (out_it == it->second.outputs.end() || out_it->second != digest)
          throw DataError("stage " + name + ": stale output digest for " +
                          path + " (file changed since it was produced)");
      }
      rec.outputs = it->second.outputs;
      rec.skipped = true;
      manifest.stages.push_back(rec);
      return;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      throw DataError("stage " + name + " failed: " + e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    for (const auto& path : outputs) rec.outputs[path] = file_digest(path);
    append_manifest(manifest_path, rec);
    previous[name] = rec;
    manifest.stages.push_back(rec);
    upstream_ran = true;
  };

  run_stage("preprocess", {cfg.train_csv, cfg.glove_path},
            {tokens_dir + "/vocab.txt", tokens_dir + "/q1.ids",
             tokens_dir + "/q2.ids", tokens_dir + "/meta.txt"},
            0, [&] {
              stage_preprocess(cfg.train_csv, cfg.glove_path,
                               cfg.model.embed_dim, cfg.model.max_len,
                               tokens_dir);
            });

  run_stage("augment", {cfg.train_csv}, {augmented_csv}, cfg.augment_seed,
            [&] { stage_augment(cfg.train_csv, cfg.augment_seed, augmented_csv); });

  run_stage("train-gru", {augmented_csv, cfg.glove_path}, {gru_ckpt},
            cfg.train.seed,
            [&] { stage_train_gru(augmented_csv, cfg, gru_ckpt); });

  run_stage("featurize", {cfg.train_csv, gru_ckpt}, {features_csv}, 0, [&] {
    stage_featurize(cfg.train_csv, gru_ckpt, cfg.train_csv,
                    cfg.stopwords_path, features_csv);
  });

  run_stage("train-secondary", {features_csv}, {secondary_model},
            cfg.secondary.forest.seed, [&] {
              stage_train_secondary(features_csv, cfg.secondary,
                                    secondary_model);
            });

  run_stage("predict",
            {cfg.test_csv, cfg.train_csv, gru_ckpt, secondary_model},
            {submission_csv}, 0, [&] {
              stage_predict(cfg, gru_ckpt, secondary_model, submission_csv);
            });

  return manifest;
}

}  // namespace quesim
