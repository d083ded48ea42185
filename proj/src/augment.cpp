#include "quesim/augment.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "quesim/errors.hpp"
#include "quesim/rng.hpp"

namespace quesim {

namespace {

// Distinct qids with a representative text, in order of first appearance.
std::vector<std::pair<std::int64_t, std::string>> distinct_questions(
    const std::vector<QuestionPair>& pairs) {
  std::vector<std::pair<std::int64_t, std::string>> out;
  std::unordered_set<std::int64_t> seen;
  for (const auto& p : pairs) {
    if (seen.insert(p.qid1).second) out.emplace_back(p.qid1, p.q1_text);
    if (seen.insert(p.qid2).second) out.emplace_back(p.qid2, p.q2_text);
  }
  return out;
}

std::int64_t max_id(const std::vector<QuestionPair>& pairs) {
  std::int64_t m = -1;
  for (const auto& p : pairs) m = std::max(m, p.id);
  return m;
}

}  // namespace

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kFlipped: return "flipped";
    case Provenance::kSelf: return "self";
    case Provenance::kSampledNegative: return "sampled_negative";
  }
  return "?";
}

std::size_t AugmentedDataset::count_label(int label) const {
  std::size_t n = 0;
  for (const auto& p : pairs)
    if (p.label && *p.label == label) ++n;
  return n;
}

std::vector<QuestionPair> flip_pairs(const std::vector<QuestionPair>& pairs) {
  std::vector<QuestionPair> out;
  out.reserve(pairs.size());
  std::int64_t next_id = max_id(pairs) + 1;
  for (const auto& p : pairs) {
    QuestionPair f = p;
    f.id = next_id++;
    std::swap(f.qid1, f.qid2);
    std::swap(f.q1_text, f.q2_text);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<QuestionPair> self_pairs(const std::vector<QuestionPair>& pairs) {
  std::vector<QuestionPair> out;
  std::int64_t next_id = max_id(pairs) + 1;
  for (const auto& [qid, text] : distinct_questions(pairs)) {
    QuestionPair s;
    s.id = next_id++;
    s.qid1 = qid;
    s.qid2 = qid;
    s.q1_text = text;
    s.q2_text = text;
    s.label = 1;
    out.push_back(std::move(s));
  }
  return out;
}

NegativeSample sample_negatives(const std::vector<QuestionPair>& pairs,
                                const DuplicateGraph& graph, std::size_t target,
                                std::uint64_t seed) {
  NegativeSample result;
  if (target == 0) return result;

  const auto questions = distinct_questions(pairs);
  const std::size_t n = questions.size();
  Rng rng(seed);
  std::unordered_set<std::uint64_t> emitted;  // unordered-pair key over indices
  std::int64_t next_id = max_id(pairs) + 1;

  const std::size_t max_attempts = 100 * target;
  std::size_t attempts = 0;
  while (result.pairs.size() < target && attempts < max_attempts && n >= 2) {
    ++attempts;
    std::size_t i = static_cast<std::size_t>(rng.below(n));
    std::size_t j = static_cast<std::size_t>(rng.below(n));
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    const auto& [qa, ta] = questions[i];
    const auto& [qb, tb] = questions[j];
    if (qa == qb) continue;
    if (graph.has_edge(qa, qb)) continue;
    if (graph.common_dup_count(qa, qb) > 0) continue;
    const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) | j;
    if (!emitted.insert(key).second) continue;
    QuestionPair p;
    p.id = next_id++;
    p.qid1 = qa;
    p.qid2 = qb;
    p.q1_text = ta;
    p.q2_text = tb;
    p.label = 0;
    result.pairs.push_back(std::move(p));
  }
  result.shortfall = target - result.pairs.size();
  return result;
}

AugmentedDataset augment_all(const std::vector<QuestionPair>& pairs,
                             std::uint64_t seed) {
  for (const auto& p : pairs)
    if (!p.label)
      throw DataError("augment: unlabeled pair id=" + std::to_string(p.id));

  AugmentedDataset out;
  out.seed = seed;
  auto push = [&out](std::vector<QuestionPair>&& batch, Provenance tag) {
    for (auto& p : batch) {
      out.pairs.push_back(std::move(p));
      out.provenance.push_back(tag);
    }
  };

  std::vector<QuestionPair> originals = pairs;
  push(std::move(originals), Provenance::kOriginal);
  push(flip_pairs(pairs), Provenance::kFlipped);
  {
    auto selfs = self_pairs(out.pairs);  // ids continue after flips
    push(std::move(selfs), Provenance::kSelf);
  }

  const std::size_t pos = out.count_label(1);
  const std::size_t neg = out.count_label(0);
  if (pos > neg) {
    const auto graph = DuplicateGraph::from_pairs(pairs);
    auto sampled = sample_negatives(out.pairs, graph, pos - neg, seed);
    out.negative_shortfall = sampled.shortfall;
    push(std::move(sampled.pairs), Provenance::kSampledNegative);
  }
  return out;
}

}  // namespace quesim
