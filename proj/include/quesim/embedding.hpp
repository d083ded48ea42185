#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "quesim/matrix.hpp"
#include "quesim/types.hpp"

namespace quesim {

inline constexpr const char* kPadToken = "PAD";
inline constexpr const char* kUnkToken = "UNK";

// Token <-> id bijection. Index 0 is PAD, index 1 is UNK; corpus words start
// at index 2 in the order they appear in the embedding file.
class Vocabulary {
 public:
  Vocabulary();

  std::int32_t add(const std::string& word);
  std::int32_t id_of(const std::string& word) const;  // UNK id when absent
  bool contains(const std::string& word) const;
  const std::string& word_of(std::int32_t id) const;
  std::size_t size() const { return id_to_word_.size(); }

  const std::vector<std::string>& words() const { return id_to_word_; }

 private:
  std::unordered_map<std::string, std::int32_t> word_to_id_;
  std::vector<std::string> id_to_word_;
};

// Vocabulary plus the embedding matrix (n_w x d_w). Row 0 (PAD) is all
// zeros and excluded from training; row 1 (UNK) is the mean of all loaded
// vectors.
struct EmbeddingStore {
  Vocabulary vocab;
  Matrix values;  // n_w x d_w
  std::size_t dim = 0;

  std::vector<Vec> lookup(const IdSeq& ids) const;
};

/// Parses a GloVe-format text file (`<token> <v1> ... <v_d>` per line) and
/// keeps exactly the tokens present in both the file and `corpus_vocab`.
EmbeddingStore load_glove(std::istream& in, std::size_t expected_dim,
                          const std::unordered_set<std::string>& corpus_vocab);
EmbeddingStore load_glove_file(const std::string& path, std::size_t expected_dim,
                               const std::unordered_set<std::string>& corpus_vocab);

}  // namespace quesim
