#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "quesim/digest.hpp"
#include "quesim/errors.hpp"
#include "quesim/pipeline.hpp"
#include "quesim/secondary.hpp"
#include "quesim/text_prep.hpp"

#include "helpers.hpp"

using namespace quesim;

namespace {

const std::string kSmokeDir = std::string(QUESIM_DATA_DIR) + "/smoke";

PipelineConfig smoke_config(const std::string& work_dir) {
  auto cfg = PipelineConfig::from_file(kSmokeDir + "/config.ini");
  cfg.work_dir = work_dir;
  return cfg;
}

}  // namespace

TEST_CASE("parse_ini sections, comments and whitespace") {
  std::istringstream in(
      "# leading comment\n"
      "top = 1\n"
      "[paths]\n"
      "train = a.csv   ; trailing comment\n"
      "  glove=g.txt\n"
      "\n"
      "[model]\n"
      "hidden = 4,8\n");
  const auto kv = parse_ini(in);
  CHECK(kv.at("top") == "1");
  CHECK(kv.at("paths.train") == "a.csv");
  CHECK(kv.at("paths.glove") == "g.txt");
  CHECK(kv.at("model.hidden") == "4,8");
  CHECK(kv.count("leading") == 0);
}

TEST_CASE("pipeline config reads the smoke ini") {
  const auto cfg = PipelineConfig::from_file(kSmokeDir + "/config.ini");
  CHECK(cfg.model.embed_dim == 8);
  CHECK(cfg.model.max_len == 12);
  CHECK(cfg.model.hidden_sizes == std::vector<std::size_t>{4});
  CHECK(cfg.model.head_hidden == std::vector<std::size_t>{8});
  CHECK(cfg.train.seed == 7);
  CHECK(cfg.augment_seed == 13);
  CHECK(cfg.secondary.kind == ClassifierKind::kRandomForest);
  // relative paths resolve against the config directory
  CHECK(std::filesystem::exists(cfg.train_csv));
  CHECK(std::filesystem::exists(cfg.glove_path));
  CHECK(std::filesystem::exists(cfg.stopwords_path));
}

TEST_CASE("fnv1a64 file digest is content based") {
  testutil::TempDir dir("digest");
  testutil::write_file(dir.str("a.txt"), "hello");
  testutil::write_file(dir.str("b.txt"), "hello");
  testutil::write_file(dir.str("c.txt"), "hello!");
  CHECK(file_digest(dir.str("a.txt")) == file_digest(dir.str("b.txt")));
  CHECK(file_digest(dir.str("a.txt")) != file_digest(dir.str("c.txt")));
  CHECK(file_digest(dir.str("a.txt")).size() == 16);
  CHECK_THROWS_AS(file_digest(dir.str("missing.txt")), DataError);
  // reference vector for the empty string: FNV-1a 64 offset basis
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("preprocess writes a token cache the stats op can read") {
  testutil::TempDir dir("prep");
  stage_preprocess(kSmokeDir + "/train.csv", kSmokeDir + "/glove.txt", 8, 12,
                   dir.str());
  CHECK(std::filesystem::exists(dir.str("vocab.txt")));
  CHECK(std::filesystem::exists(dir.str("q1.ids")));
  CHECK(std::filesystem::exists(dir.str("q2.ids")));

  const auto hist = token_cache_histogram(dir.str());
  std::size_t total = 0;
  for (const auto& [len, count] : hist) total += count;
  // one histogram entry per question of each pair
  const auto pairs = read_pairs_csv_file(kSmokeDir + "/train.csv");
  CHECK(total == 2 * pairs.size());

  // the histogram agrees with tokenizing the corpus directly
  std::vector<TokenSeq> corpus;
  for (const auto& p : pairs) {
    corpus.push_back(tokenize(p.q1_text));
    corpus.push_back(tokenize(p.q2_text));
  }
  const auto expected = length_histogram(corpus);
  REQUIRE(hist.size() == expected.size());
  for (const auto& [len, count] : hist) CHECK(expected.at(len) == count);
}

TEST_CASE("run_all executes once then skips, and reruns deleted stages") {
  testutil::TempDir work("runall");
  const auto cfg = smoke_config(work.str());

  const auto first = run_all(cfg);
  REQUIRE(first.stages.size() == 6);
  for (const auto& s : first.stages) CHECK(!s.skipped);
  CHECK(std::filesystem::exists(cfg.work_path("submission.csv")));
  CHECK(std::filesystem::exists(cfg.work_path("manifest.json")));

  const auto second = run_all(cfg);
  REQUIRE(second.stages.size() == 6);
  for (const auto& s : second.stages) CHECK(s.skipped);

  // deleting an intermediate forces that stage and its dependents to rerun
  std::filesystem::remove(cfg.work_path("features.csv"));
  const auto third = run_all(cfg);
  std::map<std::string, bool> skipped;
  for (const auto& s : third.stages) skipped[s.stage] = s.skipped;
  CHECK(skipped.at("preprocess"));
  CHECK(skipped.at("augment"));
  CHECK(skipped.at("train-gru"));
  CHECK(!skipped.at("featurize"));
  CHECK(!skipped.at("train-secondary"));
  CHECK(!skipped.at("predict"));
}

TEST_CASE("run_all is byte-deterministic across work directories") {
  testutil::TempDir w1("det1"), w2("det2");
  run_all(smoke_config(w1.str()));
  run_all(smoke_config(w2.str()));
  CHECK(testutil::read_file(w1.str() + "/submission.csv") ==
        testutil::read_file(w2.str() + "/submission.csv"));
  CHECK(testutil::read_file(w1.str() + "/submission.csv") != "");
}

TEST_CASE("tampered outputs are reported as stale digests") {
  testutil::TempDir work("stale");
  const auto cfg = smoke_config(work.str());
  run_all(cfg);
  // corrupt a recorded output while keeping the manifest
  testutil::write_file(cfg.work_path("features.csv"), "id,gru_score\n");
  CHECK_THROWS_WITH_AS(run_all(cfg), doctest::Contains("stale"), DataError);
}

TEST_CASE("submission has one probability per test row, in order") {
  testutil::TempDir work("pred");
  const auto cfg = smoke_config(work.str());
  run_all(cfg);

  std::ifstream in(cfg.work_path("submission.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "test_id,is_duplicate");
  const auto test_pairs = read_pairs_csv_file(cfg.test_csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::stoll(line.substr(0, comma)) == test_pairs[n].id);
    const double p = std::stod(line.substr(comma + 1));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    ++n;
  }
  CHECK(n == test_pairs.size());
}

TEST_CASE("predict on an empty test file emits only the header") {
  testutil::TempDir work("empty");
  auto cfg = smoke_config(work.str());
  testutil::write_file(work.str("empty_test.csv"),
                       "test_id,question1,question2\n");
  cfg.test_csv = work.str("empty_test.csv");
  run_all(cfg);
  CHECK(testutil::read_file(cfg.work_path("submission.csv")) ==
        "test_id,is_duplicate\n");
}

TEST_CASE("evaluate matches scoring the features file directly") {
  testutil::TempDir work("eval");
  const auto cfg = smoke_config(work.str());
  run_all(cfg);

  const auto result = stage_evaluate(cfg.work_path("features.csv"),
                                     cfg.work_path("secondary.model"));
  const auto rows = read_features_csv_file(cfg.work_path("features.csv"));
  const auto model = load_secondary_file(cfg.work_path("secondary.model"));
  std::vector<double> probs;
  std::vector<int> labels;
  for (const auto& r : rows) {
    probs.push_back(model.predict(r));
    labels.push_back(*r.label);
  }
  CHECK(result.rows == rows.size());
  CHECK(result.loss == log_loss(probs, labels));
  CHECK(result.acc == accuracy(probs, labels));
}

TEST_CASE("stage failures name the stage") {
  testutil::TempDir work("fail");
  auto cfg = smoke_config(work.str());
  cfg.glove_path = work.str("missing_glove.txt");
  CHECK_THROWS_WITH_AS(run_all(cfg), doctest::Contains("preprocess"),
                       DataError);
}
