#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "quesim/types.hpp"

namespace quesim {

// Undirected adjacency over question ids built from positive training
// labels. Self-pairs are never added as edges.
class DuplicateGraph {
 public:
  static DuplicateGraph from_pairs(const std::vector<QuestionPair>& pairs);

  void add_edge(std::int64_t a, std::int64_t b);
  bool has_edge(std::int64_t a, std::int64_t b) const;

  // Neighborhood of a qid; empty for unknown ids.
  const std::unordered_set<std::int64_t>& neighbors(std::int64_t qid) const;

  // |N(a) ∩ N(b)| excluding a and b themselves.
  std::size_t common_dup_count(std::int64_t a, std::int64_t b) const;

 private:
  std::unordered_map<std::int64_t, std::unordered_set<std::int64_t>> adj_;
  static const std::unordered_set<std::int64_t> kEmpty;
};

}  // namespace quesim
