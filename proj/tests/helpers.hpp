#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quesim/embedding.hpp"
#include "quesim/gru.hpp"
#include "quesim/rng.hpp"
#include "quesim/text_prep.hpp"
#include "quesim/types.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("quesim_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  fs::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// In-memory embedding store over the given words with deterministic values.
inline quesim::EmbeddingStore make_store(const std::vector<std::string>& words,
                                         std::size_t dim, std::uint64_t seed) {
  quesim::EmbeddingStore store;
  store.dim = dim;
  store.values = quesim::Matrix(words.size() + 2, dim);
  quesim::Rng rng(seed);
  for (const auto& w : words) {
    const auto id = store.vocab.add(w);
    auto row = store.values.row(static_cast<std::size_t>(id));
    for (double& v : row) v = rng.uniform(-0.5, 0.5);
  }
  // UNK = mean of word rows, matching the loader
  if (!words.empty()) {
    auto unk = store.values.row(quesim::kUnkId);
    for (std::size_t i = 2; i < store.values.rows(); ++i) {
      const auto row = store.values.row(i);
      for (std::size_t j = 0; j < dim; ++j) unk[j] += row[j];
    }
    for (double& v : unk) v /= static_cast<double>(words.size());
  }
  return store;
}

// GloVe text file for the given words, values deterministic in the seed.
inline void write_glove(const std::string& path,
                        const std::vector<std::string>& words, std::size_t dim,
                        std::uint64_t seed) {
  quesim::Rng rng(seed);
  std::ostringstream out;
  out.precision(17);
  for (const auto& w : words) {
    out << w;
    for (std::size_t j = 0; j < dim; ++j) out << ' ' << rng.uniform(-0.5, 0.5);
    out << '\n';
  }
  write_file(path, out.str());
}

// Tiny model config used by gradient checks and fast training tests.
inline quesim::ModelConfig tiny_config(std::size_t embed_dim = 4,
                                       std::vector<std::size_t> hidden = {3, 2},
                                       std::vector<std::size_t> head = {5},
                                       std::size_t max_len = 5) {
  quesim::ModelConfig cfg;
  cfg.embed_dim = embed_dim;
  cfg.max_len = max_len;
  cfg.hidden_sizes = std::move(hidden);
  cfg.head_hidden = std::move(head);
  cfg.keep_prob = 1.0;
  return cfg;
}

// Word pool for synthetic questions.
inline std::vector<std::string> word_pool(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return words;
}

// Synthetic corpus with planted duplicate clusters: questions in the same
// cluster share a topic word set and are labeled duplicates.
struct ClusterCorpus {
  std::vector<quesim::QuestionPair> train;
  std::vector<quesim::QuestionPair> test;  // labeled, held out
  std::vector<std::string> vocabulary;
};

inline ClusterCorpus make_cluster_corpus(std::size_t n_clusters,
                                         std::size_t per_cluster,
                                         std::size_t train_pairs,
                                         std::size_t test_pairs,
                                         std::uint64_t seed) {
  quesim::Rng rng(seed);
  const std::size_t topic_words = 3;
  ClusterCorpus corpus;
  for (std::size_t i = 0; i < n_clusters * topic_words + 10; ++i)
    corpus.vocabulary.push_back("t" + std::to_string(i));

  // question text: the cluster's topic words plus one filler, shuffled a bit
  auto question_text = [&](std::size_t cluster, std::size_t member) {
    std::ostringstream ss;
    const std::size_t base = cluster * topic_words;
    ss << "t" << base + member % topic_words << " t" << base << " t"
       << base + 1 << " t" << (n_clusters * topic_words + member % 10);
    return ss.str();
  };
  auto qid_of = [&](std::size_t cluster, std::size_t member) {
    return static_cast<std::int64_t>(cluster * per_cluster + member + 1);
  };

  std::int64_t next_id = 0;
  auto make_pair = [&](bool positive) {
    quesim::QuestionPair p;
    p.id = next_id++;
    const std::size_t c1 = static_cast<std::size_t>(rng.below(n_clusters));
    const std::size_t m1 = static_cast<std::size_t>(rng.below(per_cluster));
    if (positive) {
      std::size_t m2 = static_cast<std::size_t>(rng.below(per_cluster));
      while (m2 == m1) m2 = static_cast<std::size_t>(rng.below(per_cluster));
      p.qid1 = qid_of(c1, m1);
      p.qid2 = qid_of(c1, m2);
      p.q1_text = question_text(c1, m1);
      p.q2_text = question_text(c1, m2);
      p.label = 1;
    } else {
      std::size_t c2 = static_cast<std::size_t>(rng.below(n_clusters));
      while (c2 == c1) c2 = static_cast<std::size_t>(rng.below(n_clusters));
      const std::size_t m2 = static_cast<std::size_t>(rng.below(per_cluster));
      p.qid1 = qid_of(c1, m1);
      p.qid2 = qid_of(c2, m2);
      p.q1_text = question_text(c1, m1);
      p.q2_text = question_text(c2, m2);
      p.label = 0;
    }
    return p;
  };

  for (std::size_t i = 0; i < train_pairs; ++i)
    corpus.train.push_back(make_pair(i % 2 == 0));
  for (std::size_t i = 0; i < test_pairs; ++i)
    corpus.test.push_back(make_pair(i % 2 == 0));
  return corpus;
}

// Serializes pairs to a training-schema CSV file.
inline void write_pairs_file(const std::string& path,
                             const std::vector<quesim::QuestionPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  quesim::write_pairs_csv(out, pairs);
}

}  // namespace testutil
