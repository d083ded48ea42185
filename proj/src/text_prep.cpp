#include "quesim/text_prep.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "quesim/csv.hpp"
#include "quesim/embedding.hpp"
#include "quesim/errors.hpp"

namespace quesim {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Unicode space code points split on in addition to ASCII whitespace.
bool is_unicode_space(char32_t cp) {
  if (cp == 0x00A0 || cp == 0x1680 || cp == 0x2028 || cp == 0x2029 ||
      cp == 0x202F || cp == 0x205F || cp == 0x3000)
    return true;
  return cp >= 0x2000 && cp <= 0x200A;
}

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c);
}

// Decodes one UTF-8 code point starting at i; on malformed input consumes a
// single byte. Returns the code point and advances i.
char32_t next_codepoint(const std::string& s, std::size_t& i) {
  const unsigned char c = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  char32_t cp = c;
  if (c >= 0xF0) { len = 4; cp = c & 0x07; }
  else if (c >= 0xE0) { len = 3; cp = c & 0x0F; }
  else if (c >= 0xC0) { len = 2; cp = c & 0x1F; }
  if (i + len > s.size()) len = 1;
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) { len = k; break; }
    cp = (cp << 6) | (cc & 0x3F);
  }
  if (len == 1) cp = c;
  i += len;
  return cp;
}

void emit_chunk(const std::string& chunk, TokenSeq& out) {
  std::size_t lo = 0, hi = chunk.size();
  // leading punctuation, one token per character
  while (lo < hi && is_ascii_punct(chunk[lo])) {
    out.push_back(std::string(1, chunk[lo]));
    ++lo;
  }
  // trailing punctuation, peeled then emitted in order after the core
  std::size_t tail = hi;
  while (tail > lo && is_ascii_punct(chunk[tail - 1])) --tail;
  if (tail > lo) out.push_back(chunk.substr(lo, tail - lo));
  for (std::size_t i = tail; i < hi; ++i) out.push_back(std::string(1, chunk[i]));
}

}  // namespace

TokenSeq tokenize(const std::string& text) {
  TokenSeq out;
  std::string chunk;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      ++i;
      if (is_ascii_space(c)) {
        if (!chunk.empty()) { emit_chunk(chunk, out); chunk.clear(); }
      } else {
        chunk.push_back(static_cast<char>(std::tolower(c)));
      }
    } else {
      const char32_t cp = next_codepoint(text, i);
      if (is_unicode_space(cp)) {
        if (!chunk.empty()) { emit_chunk(chunk, out); chunk.clear(); }
      } else {
        chunk.append(text, start, i - start);  // non-ASCII kept as-is
      }
    }
  }
  if (!chunk.empty()) emit_chunk(chunk, out);
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

IdSeq encode(const TokenSeq& tokens, const Vocabulary& vocab,
             std::size_t max_len) {
  if (max_len == 0) throw ConfigError("encode: max_len must be >= 1");
  IdSeq ids(max_len, kPadId);
  const std::size_t n = std::min(tokens.size(), max_len);
  const std::size_t offset = max_len - n;  // pre-padding
  for (std::size_t i = 0; i < n; ++i)
    ids[offset + i] = vocab.id_of(tokens[i]);
  return ids;
}

TokenSeq decode(const IdSeq& ids, const Vocabulary& vocab) {
  TokenSeq out;
  for (std::int32_t id : ids) {
    if (id == kPadId) continue;
    out.push_back(vocab.word_of(id));
  }
  return out;
}

std::map<std::size_t, std::size_t> length_histogram(
    const std::vector<TokenSeq>& corpus) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& seq : corpus) ++hist[seq.size()];
  return hist;
}

namespace {

std::int64_t parse_int(const std::string& s, std::size_t line,
                       const char* what) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("csv line " + std::to_string(line) + ": bad " + what +
                    " value '" + s + "'");
  }
}

}  // namespace

std::vector<QuestionPair> read_pairs_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw DataError("csv: empty file");

  enum class Schema { kTrain, kTest };
  Schema schema;
  if ((fields.size() == 6 || fields.size() == 7) && fields[0] == "id") {
    schema = Schema::kTrain;
  } else if (fields.size() == 3 && fields[0] == "test_id") {
    schema = Schema::kTest;
  } else {
    throw DataError("csv: unrecognized header '" + join_tokens(fields) + "'");
  }

  std::vector<QuestionPair> pairs;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    QuestionPair p;
    if (schema == Schema::kTrain) {
      if (fields.size() != 6 && fields.size() != 7)
        throw DataError("csv line " + std::to_string(reader.line()) +
                        ": expected 6 fields, got " +
                        std::to_string(fields.size()));
      p.id = parse_int(fields[0], reader.line(), "id");
      p.qid1 = parse_int(fields[1], reader.line(), "qid1");
      p.qid2 = parse_int(fields[2], reader.line(), "qid2");
      if (p.qid1 < 0 || p.qid2 < 0)
        throw DataError("csv line " + std::to_string(reader.line()) +
                        ": negative qid");
      p.q1_text = fields[3];
      p.q2_text = fields[4];
      const std::int64_t y = parse_int(fields[5], reader.line(), "is_duplicate");
      if (y != 0 && y != 1)
        throw DataError("csv line " + std::to_string(reader.line()) +
                        ": label must be 0 or 1, got " + fields[5]);
      p.label = static_cast<int>(y);
    } else {
      if (fields.size() != 3)
        throw DataError("csv line " + std::to_string(reader.line()) +
                        ": expected 3 fields, got " +
                        std::to_string(fields.size()));
      p.id = parse_int(fields[0], reader.line(), "test_id");
      p.qid1 = -1;
      p.qid2 = -1;
      p.q1_text = fields[1];
      p.q2_text = fields[2];
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<QuestionPair> read_pairs_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_pairs_csv(in);
}

void write_pairs_csv(std::ostream& out, const std::vector<QuestionPair>& pairs,
                     const std::vector<std::string>& provenance) {
  const bool tagged = !provenance.empty();
  if (tagged && provenance.size() != pairs.size())
    throw DataError("write_pairs_csv: provenance size mismatch");
  out << "id,qid1,qid2,question1,question2,is_duplicate";
  if (tagged) out << ",provenance";
  out << '\n';
  std::vector<std::string> fields;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    fields = {std::to_string(p.id), std::to_string(p.qid1),
              std::to_string(p.qid2), p.q1_text, p.q2_text,
              p.label ? std::to_string(*p.label) : std::string()};
    if (tagged) fields.push_back(provenance[i]);
    csv_write_row(out, fields);
  }
}

}  // namespace quesim
