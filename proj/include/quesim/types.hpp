#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace quesim {

// One row of the question-pair corpus. `label` is absent for test rows.
struct QuestionPair {
  std::int64_t id = 0;
  std::int64_t qid1 = 0;
  std::int64_t qid2 = 0;
  std::string q1_text;
  std::string q2_text;
  std::optional<int> label;  // 0 or 1 when present
};

using TokenSeq = std::vector<std::string>;

// Fixed-length sequence of vocabulary ids. Index 0 is PAD, index 1 is UNK;
// padding occupies a contiguous prefix.
using IdSeq = std::vector<std::int32_t>;

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;

}  // namespace quesim
