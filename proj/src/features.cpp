#include "quesim/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "quesim/csv.hpp"
#include "quesim/errors.hpp"
#include "quesim/text_prep.hpp"

namespace quesim {

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "the",  "a",     "an",    "and",  "or",    "but",  "if",    "then",
      "is",   "are",   "was",   "were", "be",    "been", "being", "am",
      "do",   "does",  "did",   "have", "has",   "had",  "i",     "you",
      "he",   "she",   "it",    "we",   "they",  "me",   "him",   "her",
      "us",   "them",  "my",    "your", "his",   "its",  "our",   "their",
      "this", "that",  "these", "those", "to",   "of",   "in",    "on",
      "at",   "by",    "for",   "with", "from",  "as",   "so",    "than",
      "too"};
  return words;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

namespace {

TokenSeq filter_stopwords(const TokenSeq& t,
                          const std::unordered_set<std::string>& stopwords) {
  TokenSeq out;
  for (const auto& w : t)
    if (!stopwords.count(w)) out.push_back(w);
  return out;
}

}  // namespace

double word_match_share(const TokenSeq& t1, const TokenSeq& t2,
                        const std::unordered_set<std::string>& stopwords) {
  const TokenSeq a = filter_stopwords(t1, stopwords);
  const TokenSeq b = filter_stopwords(t2, stopwords);
  if (a.empty() && b.empty()) return 0.0;
  const std::unordered_set<std::string> sa(a.begin(), a.end());
  const std::unordered_set<std::string> sb(b.begin(), b.end());
  std::size_t shared = 0;
  for (const auto& w : a)
    if (sb.count(w)) ++shared;
  for (const auto& w : b)
    if (sa.count(w)) ++shared;
  return static_cast<double>(shared) / static_cast<double>(a.size() + b.size());
}

IdfTable build_idf(const std::vector<TokenSeq>& corpus) {
  if (corpus.empty()) throw DataError("build_idf: empty corpus");
  IdfTable table;
  table.n_docs = corpus.size();
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& w : doc)
      if (seen.insert(w).second) ++df[w];
  }
  for (const auto& [word, count] : df) {
    const double w = std::log(static_cast<double>(table.n_docs) /
                              (1.0 + static_cast<double>(count)));
    table.weight[word] = std::max(0.0, w);
  }
  return table;
}

double tfidf_word_match(const TokenSeq& t1, const TokenSeq& t2,
                        const IdfTable& idf,
                        const std::unordered_set<std::string>& stopwords) {
  const TokenSeq a = filter_stopwords(t1, stopwords);
  const TokenSeq b = filter_stopwords(t2, stopwords);
  const std::unordered_set<std::string> sa(a.begin(), a.end());
  const std::unordered_set<std::string> sb(b.begin(), b.end());
  double shared = 0.0, total = 0.0;
  for (const auto& w : a) {
    const double wt = idf.of(w);
    total += wt;
    if (sb.count(w)) shared += wt;
  }
  for (const auto& w : b) {
    const double wt = idf.of(w);
    total += wt;
    if (sa.count(w)) shared += wt;
  }
  return total == 0.0 ? 0.0 : shared / total;
}

FeatureContext FeatureContext::build(
    const std::vector<QuestionPair>& training_pairs,
    std::unordered_set<std::string> stopwords) {
  FeatureContext ctx;
  ctx.stopwords = std::move(stopwords);
  ctx.graph = DuplicateGraph::from_pairs(training_pairs);

  std::vector<TokenSeq> corpus;
  std::unordered_set<std::int64_t> seen;
  for (const auto& p : training_pairs) {
    if (seen.insert(p.qid1).second) corpus.push_back(tokenize(p.q1_text));
    if (seen.insert(p.qid2).second) corpus.push_back(tokenize(p.q2_text));
  }
  ctx.idf = build_idf(corpus);
  return ctx;
}

std::vector<FeatureRow> featurize(const std::vector<QuestionPair>& pairs,
                                  const SiameseModel& model,
                                  const FeatureContext& ctx) {
  std::vector<FeatureRow> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto t1 = tokenize(p.q1_text);
    const auto t2 = tokenize(p.q2_text);
    FeatureRow row;
    row.id = p.id;
    row.label = p.label;
    const auto ids1 = encode(t1, model.vocab, model.cfg.max_len);
    const auto ids2 = encode(t2, model.vocab, model.cfg.max_len);
    row.gru_score = forward_pair(model, ids1, ids2, false, nullptr).y_hat;
    row.word_match = word_match_share(t1, t2, ctx.stopwords);
    row.tfidf_match = tfidf_word_match(t1, t2, ctx.idf, ctx.stopwords);
    row.common_dups = static_cast<double>(
        ctx.graph.common_dup_count(p.qid1, p.qid2));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_features_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  const bool labeled = !rows.empty() && rows.front().label.has_value();
  out << "id,gru_score,word_match,tfidf_match,common_dups";
  if (labeled) out << ",label";
  out << '\n';
  for (const auto& r : rows) {
    out << r.id << ',' << fmt_g17(r.gru_score) << ',' << fmt_g17(r.word_match)
        << ',' << fmt_g17(r.tfidf_match) << ','
        << static_cast<long long>(r.common_dups);
    if (labeled) {
      if (!r.label) throw DataError("write_features_csv: mixed labeled rows");
      out << ',' << *r.label;
    }
    out << '\n';
  }
}

std::vector<FeatureRow> read_features_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw DataError("features csv: empty file");
  bool labeled;
  if (fields.size() == 6 && fields[5] == "label") labeled = true;
  else if (fields.size() == 5) labeled = false;
  else throw DataError("features csv: unrecognized header");

  std::vector<FeatureRow> rows;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != (labeled ? 6u : 5u))
      throw DataError("features csv line " + std::to_string(reader.line()) +
                      ": wrong field count");
    try {
      FeatureRow r;
      r.id = std::stoll(fields[0]);
      r.gru_score = std::stod(fields[1]);
      r.word_match = std::stod(fields[2]);
      r.tfidf_match = std::stod(fields[3]);
      r.common_dups = std::stod(fields[4]);
      if (labeled) {
        const int y = std::stoi(fields[5]);
        if (y != 0 && y != 1) throw std::invalid_argument("label");
        r.label = y;
      }
      rows.push_back(r);
    } catch (const std::exception&) {
      throw DataError("features csv line " + std::to_string(reader.line()) +
                      ": unparsable row");
    }
  }
  return rows;
}

std::vector<FeatureRow> read_features_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_features_csv(in);
}

}  // namespace quesim
