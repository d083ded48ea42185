#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quesim/graph.hpp"
#include "quesim/types.hpp"

namespace quesim {

enum class Provenance { kOriginal, kFlipped, kSelf, kSampledNegative };

const char* provenance_name(Provenance p);

// Training set expanded by flipping, self-pairing and balanced negative
// sampling. Feeds only the GRU trainer; secondary classifiers train on the
// original pairs.
struct AugmentedDataset {
  std::vector<QuestionPair> pairs;
  std::vector<Provenance> provenance;  // parallel to pairs
  std::uint64_t seed = 0;
  std::size_t negative_shortfall = 0;  // requested minus emitted samples

  std::size_t count_label(int label) const;
};

/// One new pair per input pair with questions and qids swapped, label kept.
std::vector<QuestionPair> flip_pairs(const std::vector<QuestionPair>& pairs);

/// One positive (q, q) pair per distinct qid appearing anywhere in the
/// input, in order of first appearance.
std::vector<QuestionPair> self_pairs(const std::vector<QuestionPair>& pairs);

/// Draws `target` negative pairs (a, b), a != b, that are not known
/// positives and share no duplicate neighbor in `graph`. Deterministic for a
/// given seed. When fewer valid pairs exist, emits what it can and reports
/// the shortfall through the second return member.
struct NegativeSample {
  std::vector<QuestionPair> pairs;
  std::size_t shortfall = 0;
};
NegativeSample sample_negatives(const std::vector<QuestionPair>& pairs,
                                const DuplicateGraph& graph, std::size_t target,
                                std::uint64_t seed);

/// originals + flips + self pairs, then negatives sampled to equalize the
/// class counts. All inputs must be labeled.
AugmentedDataset augment_all(const std::vector<QuestionPair>& pairs,
                             std::uint64_t seed);

}  // namespace quesim
