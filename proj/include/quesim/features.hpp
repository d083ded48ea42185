#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "quesim/graph.hpp"
#include "quesim/gru.hpp"
#include "quesim/types.hpp"

namespace quesim {

// Inverse-document-frequency weights over distinct questions:
// weight(w) = max(0, ln(n_docs / (1 + df(w)))), unseen words weigh 0.
struct IdfTable {
  std::unordered_map<std::string, double> weight;
  std::size_t n_docs = 0;

  double of(const std::string& word) const {
    auto it = weight.find(word);
    return it == weight.end() ? 0.0 : it->second;
  }
};

// The 4-vector fed to the secondary classifiers.
struct FeatureRow {
  std::int64_t id = 0;
  double gru_score = 0.5;   // y_hat from the Siamese model
  double word_match = 0.0;  // in [0, 1]
  double tfidf_match = 0.0; // in [0, 1]
  double common_dups = 0.0; // nonnegative integer count
  std::optional<int> label;

  std::vector<double> as_vector() const {
    return {gru_score, word_match, tfidf_match, common_dups};
  }
};

inline constexpr std::size_t kFeatureCount = 4;

/// The built-in 57-word English stopword list.
const std::unordered_set<std::string>& default_stopwords();

/// Loads one stopword per line.
std::unordered_set<std::string> load_stopwords(const std::string& path);

/// Overlap of non-stopword tokens, counted with multiplicity against set
/// membership in the other question; in [0, 1].
double word_match_share(const TokenSeq& t1, const TokenSeq& t2,
                        const std::unordered_set<std::string>& stopwords);

/// IDF table over all distinct questions' token sequences.
IdfTable build_idf(const std::vector<TokenSeq>& corpus);

/// Same counting as word_match_share with each token contributing its IDF
/// weight; in [0, 1].
double tfidf_word_match(const TokenSeq& t1, const TokenSeq& t2,
                        const IdfTable& idf,
                        const std::unordered_set<std::string>& stopwords);

/// Builds the duplicate graph and IDF table from training pairs (original,
/// unaugmented data).
struct FeatureContext {
  DuplicateGraph graph;
  IdfTable idf;
  std::unordered_set<std::string> stopwords;

  static FeatureContext build(const std::vector<QuestionPair>& training_pairs,
                              std::unordered_set<std::string> stopwords =
                                  default_stopwords());
};

/// One FeatureRow per pair, in input order; GRU scores from the frozen model.
std::vector<FeatureRow> featurize(const std::vector<QuestionPair>& pairs,
                                  const SiameseModel& model,
                                  const FeatureContext& ctx);

void write_features_csv(std::ostream& out, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_features_csv(std::istream& in);
std::vector<FeatureRow> read_features_csv_file(const std::string& path);

}  // namespace quesim
