#include <doctest.h>

#include <algorithm>
#include <set>

#include "quesim/augment.hpp"
#include "quesim/errors.hpp"

#include "helpers.hpp"

using namespace quesim;

namespace {

QuestionPair make_pair(std::int64_t id, std::int64_t qid1, std::int64_t qid2,
                       int label) {
  QuestionPair p;
  p.id = id;
  p.qid1 = qid1;
  p.qid2 = qid2;
  p.q1_text = "q" + std::to_string(qid1);
  p.q2_text = "q" + std::to_string(qid2);
  p.label = label;
  return p;
}

}  // namespace

TEST_CASE("flip_pairs swaps questions and keeps labels") {
  CHECK(flip_pairs({}).empty());

  const std::vector<QuestionPair> pairs = {
      make_pair(0, 1, 2, 1), make_pair(1, 3, 4, 0), make_pair(2, 5, 6, 1)};
  const auto flips = flip_pairs(pairs);
  REQUIRE(flips.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(flips[i].qid1 == pairs[i].qid2);
    CHECK(flips[i].qid2 == pairs[i].qid1);
    CHECK(flips[i].q1_text == pairs[i].q2_text);
    CHECK(flips[i].q2_text == pairs[i].q1_text);
    CHECK(flips[i].label == pairs[i].label);
  }
}

TEST_CASE("self_pairs emits one positive per distinct qid") {
  std::vector<QuestionPair> pairs = {make_pair(0, 1, 2, 1),
                                     make_pair(1, 2, 3, 0)};
  // qid 2 appears twice but yields a single self pair
  const auto selfs = self_pairs(pairs);
  REQUIRE(selfs.size() == 3);
  std::set<std::int64_t> qids;
  for (const auto& p : selfs) {
    CHECK(p.qid1 == p.qid2);
    CHECK(p.q1_text == p.q2_text);
    CHECK(p.label == 1);
    qids.insert(p.qid1);
  }
  CHECK(qids == std::set<std::int64_t>{1, 2, 3});
}

TEST_CASE("self pair count at full corpus scale") {
  // 404290 original pairs with 149263 positives over 537933 distinct
  // questions: flips double the positives and self pairs add one per
  // distinct question.
  const std::size_t original_pos = 149263;
  const std::size_t distinct = 537933;
  CHECK(2 * original_pos + distinct == 836459);
}

TEST_CASE("sample_negatives rejects the only invalid candidate") {
  const std::vector<QuestionPair> pairs = {make_pair(0, 1, 2, 1)};
  const auto graph = DuplicateGraph::from_pairs(pairs);
  const auto result = sample_negatives(pairs, graph, 1, 42);
  CHECK(result.pairs.empty());
  CHECK(result.shortfall == 1);
}

TEST_CASE("sample_negatives finds all valid candidates") {
  // 4 mutually non-duplicate questions: 6 unordered candidate pairs, all valid
  std::vector<QuestionPair> pairs = {make_pair(0, 1, 2, 0),
                                     make_pair(1, 3, 4, 0)};
  const auto graph = DuplicateGraph::from_pairs(pairs);
  const auto result = sample_negatives(pairs, graph, 3, 7);
  REQUIRE(result.pairs.size() == 3);
  CHECK(result.shortfall == 0);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const auto& p : result.pairs) {
    CHECK(p.label == 0);
    CHECK(p.qid1 != p.qid2);
    CHECK(!graph.has_edge(p.qid1, p.qid2));
    CHECK(graph.common_dup_count(p.qid1, p.qid2) == 0);
    const auto key = std::minmax(p.qid1, p.qid2);
    CHECK(seen.insert(key).second);  // no repeats
  }
}

TEST_CASE("sample_negatives avoids common duplicate neighbors") {
  // 1-3 and 2-3 are duplicates, so (1,2) shares neighbor 3 and is invalid;
  // 4 and 5 are free
  std::vector<QuestionPair> pairs = {make_pair(0, 1, 3, 1),
                                     make_pair(1, 2, 3, 1),
                                     make_pair(2, 4, 5, 0)};
  const auto graph = DuplicateGraph::from_pairs(pairs);
  const auto result = sample_negatives(pairs, graph, 50, 3);
  CHECK(result.shortfall > 0);
  for (const auto& p : result.pairs) {
    const auto key = std::minmax(p.qid1, p.qid2);
    CHECK(key != std::minmax<std::int64_t>(1, 2));
    CHECK(key != std::minmax<std::int64_t>(1, 3));
    CHECK(key != std::minmax<std::int64_t>(2, 3));
    CHECK(graph.common_dup_count(p.qid1, p.qid2) == 0);
  }
}

TEST_CASE("sample_negatives is deterministic in the seed") {
  const auto corpus = testutil::make_cluster_corpus(8, 4, 60, 0, 5);
  const auto graph = DuplicateGraph::from_pairs(corpus.train);
  const auto a = sample_negatives(corpus.train, graph, 20, 99);
  const auto b = sample_negatives(corpus.train, graph, 20, 99);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].qid1 == b.pairs[i].qid1);
    CHECK(a.pairs[i].qid2 == b.pairs[i].qid2);
  }
}

TEST_CASE("augment_all single positive pair") {
  const std::vector<QuestionPair> pairs = {make_pair(0, 1, 2, 1)};
  const auto aug = augment_all(pairs, 11);
  // original + flip + two self pairs, no negative candidates exist
  CHECK(aug.count_label(1) == 4);
  CHECK(aug.count_label(0) == 0);
  CHECK(aug.negative_shortfall == 4);
}

TEST_CASE("augment_all composition and balance") {
  const auto corpus = testutil::make_cluster_corpus(12, 4, 120, 0, 17);
  const auto& pairs = corpus.train;
  const auto aug = augment_all(pairs, 23);

  std::size_t original_pos = 0;
  for (const auto& p : pairs)
    if (*p.label == 1) ++original_pos;
  std::set<std::int64_t> distinct;
  for (const auto& p : pairs) {
    distinct.insert(p.qid1);
    distinct.insert(p.qid2);
  }

  // count identity before balancing
  CHECK(aug.count_label(1) == 2 * original_pos + distinct.size());
  // exact balance when candidates suffice
  CHECK(aug.negative_shortfall == 0);
  CHECK(aug.count_label(0) == aug.count_label(1));
  CHECK(aug.pairs.size() == aug.provenance.size());

  // originals are a prefix of the output, tagged as such
  REQUIRE(aug.pairs.size() >= pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(aug.provenance[i] == Provenance::kOriginal);
    CHECK(aug.pairs[i].qid1 == pairs[i].qid1);
    CHECK(aug.pairs[i].qid2 == pairs[i].qid2);
  }

  // provenance tags are internally consistent
  const auto graph = DuplicateGraph::from_pairs(pairs);
  for (std::size_t i = 0; i < aug.pairs.size(); ++i) {
    const auto& p = aug.pairs[i];
    switch (aug.provenance[i]) {
      case Provenance::kSelf:
        CHECK(p.qid1 == p.qid2);
        CHECK(*p.label == 1);
        break;
      case Provenance::kSampledNegative:
        CHECK(*p.label == 0);
        CHECK(p.qid1 != p.qid2);
        CHECK(graph.common_dup_count(p.qid1, p.qid2) == 0);
        break;
      default:
        break;
    }
  }
}

TEST_CASE("augment_all is bit-reproducible") {
  const auto corpus = testutil::make_cluster_corpus(10, 3, 80, 0, 31);
  const auto a = augment_all(corpus.train, 555);
  const auto b = augment_all(corpus.train, 555);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].qid1 == b.pairs[i].qid1);
    CHECK(a.pairs[i].qid2 == b.pairs[i].qid2);
    CHECK(a.pairs[i].label == b.pairs[i].label);
    CHECK(a.provenance[i] == b.provenance[i]);
  }
}

TEST_CASE("augment_all rejects unlabeled input") {
  QuestionPair p = make_pair(0, 1, 2, 1);
  p.label.reset();
  CHECK_THROWS_AS(augment_all({p}, 1), DataError);
}
