#include "quesim/graph.hpp"

namespace quesim {

const std::unordered_set<std::int64_t> DuplicateGraph::kEmpty{};

DuplicateGraph DuplicateGraph::from_pairs(const std::vector<QuestionPair>& pairs) {
  DuplicateGraph g;
  for (const auto& p : pairs)
    if (p.label && *p.label == 1) g.add_edge(p.qid1, p.qid2);
  return g;
}

void DuplicateGraph::add_edge(std::int64_t a, std::int64_t b) {
  if (a == b) return;
  adj_[a].insert(b);
  adj_[b].insert(a);
}

bool DuplicateGraph::has_edge(std::int64_t a, std::int64_t b) const {
  auto it = adj_.find(a);
  return it != adj_.end() && it->second.count(b) != 0;
}

const std::unordered_set<std::int64_t>& DuplicateGraph::neighbors(
    std::int64_t qid) const {
  auto it = adj_.find(qid);
  return it == adj_.end() ? kEmpty : it->second;
}

std::size_t DuplicateGraph::common_dup_count(std::int64_t a,
                                             std::int64_t b) const {
  const auto& na = neighbors(a);
  const auto& nb = neighbors(b);
  const auto& small = na.size() <= nb.size() ? na : nb;
  const auto& large = na.size() <= nb.size() ? nb : na;
  std::size_t n = 0;
  for (std::int64_t q : small)
    if (q != a && q != b && large.count(q)) ++n;
  return n;
}

}  // namespace quesim
