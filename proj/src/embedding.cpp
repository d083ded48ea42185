#include "quesim/embedding.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "quesim/errors.hpp"

namespace quesim {

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

std::int32_t Vocabulary::add(const std::string& word) {
  auto it = word_to_id_.find(word);
  if (it != word_to_id_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(id_to_word_.size());
  word_to_id_.emplace(word, id);
  id_to_word_.push_back(word);
  return id;
}

std::int32_t Vocabulary::id_of(const std::string& word) const {
  auto it = word_to_id_.find(word);
  return it == word_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& word) const {
  return word_to_id_.count(word) != 0;
}

const std::string& Vocabulary::word_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_word_.size())
    throw DataError("vocabulary: id " + std::to_string(id) + " out of range");
  return id_to_word_[static_cast<std::size_t>(id)];
}

std::vector<Vec> EmbeddingStore::lookup(const IdSeq& ids) const {
  std::vector<Vec> out;
  out.reserve(ids.size());
  for (std::int32_t id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= values.rows())
      throw DataError("embedding lookup: id " + std::to_string(id) +
                      " out of range (corrupted cache?)");
    const auto r = values.row(static_cast<std::size_t>(id));
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

EmbeddingStore load_glove(std::istream& in, std::size_t expected_dim,
                          const std::unordered_set<std::string>& corpus_vocab) {
  if (expected_dim == 0) throw ConfigError("load_glove: expected_dim must be >= 1");

  std::vector<std::pair<std::string, Vec>> rows;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0)
      throw DataError("glove line " + std::to_string(line_no) +
                      ": expected '<token> <v1> ...'");
    std::string token = line.substr(0, sp);

    Vec vals;
    vals.reserve(expected_dim);
    const char* p = line.data() + sp;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw DataError("glove line " + std::to_string(line_no) +
                        ": unparsable float near '" + std::string(p, std::min<std::size_t>(8, end - p)) + "'");
      vals.push_back(v);
      p = next;
    }
    if (vals.size() != expected_dim)
      throw DataError("glove: token '" + token + "' (line " +
                      std::to_string(line_no) + ") has dimension " +
                      std::to_string(vals.size()) + ", expected " +
                      std::to_string(expected_dim));
    if (corpus_vocab.count(token) && seen.insert(token).second)
      rows.emplace_back(std::move(token), std::move(vals));
  }

  EmbeddingStore store;
  store.dim = expected_dim;
  store.values = Matrix(rows.size() + 2, expected_dim, 0.0);
  for (const auto& [token, vals] : rows) {
    const auto id = store.vocab.add(token);
    auto dst = store.values.row(static_cast<std::size_t>(id));
    std::copy(vals.begin(), vals.end(), dst.begin());
  }
  // UNK = mean of loaded rows; zeros when nothing was loaded
  if (!rows.empty()) {
    auto unk = store.values.row(kUnkId);
    for (const auto& [token, vals] : rows)
      for (std::size_t j = 0; j < expected_dim; ++j) unk[j] += vals[j];
    for (std::size_t j = 0; j < expected_dim; ++j)
      unk[j] /= static_cast<double>(rows.size());
  }
  return store;
}

EmbeddingStore load_glove_file(const std::string& path, std::size_t expected_dim,
                               const std::unordered_set<std::string>& corpus_vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_glove(in, expected_dim, corpus_vocab);
}

}  // namespace quesim
