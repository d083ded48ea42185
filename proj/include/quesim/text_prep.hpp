#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "quesim/types.hpp"

namespace quesim {

class Vocabulary;

/// Deterministic rule-based tokenizer:
///   1. lowercase ASCII letters;
///   2. split on whitespace (ASCII plus common Unicode space code points);
///   3. peel leading/trailing ASCII punctuation off each chunk into
///      single-character tokens. Internal punctuation ("don't", "e-mail")
///      stays attached.
TokenSeq tokenize(const std::string& text);

/// Joins tokens with single spaces. tokenize(join(tokenize(s))) == tokenize(s).
std::string join_tokens(const TokenSeq& tokens);

/// Encodes tokens as a fixed-length id sequence: PAD prefix for short
/// inputs, head-truncation for long ones, UNK for out-of-vocabulary words.
/// max_len must be >= 1.
IdSeq encode(const TokenSeq& tokens, const Vocabulary& vocab, std::size_t max_len);

/// Inverse of encode up to truncation and UNK substitution; PAD prefix is
/// dropped.
TokenSeq decode(const IdSeq& ids, const Vocabulary& vocab);

/// Sentence-length distribution; counts sum to the number of sequences.
std::map<std::size_t, std::size_t> length_histogram(
    const std::vector<TokenSeq>& corpus);

/// Reads a question-pair CSV. Accepts the labeled training header
/// `id,qid1,qid2,question1,question2,is_duplicate` and the unlabeled test
/// header `test_id,question1,question2` (test rows get qid1 = qid2 = -1).
std::vector<QuestionPair> read_pairs_csv(std::istream& in);
std::vector<QuestionPair> read_pairs_csv_file(const std::string& path);

/// Writes pairs in the training schema; `provenance`, when nonempty, adds a
/// trailing column (one tag per pair).
void write_pairs_csv(std::ostream& out, const std::vector<QuestionPair>& pairs,
                     const std::vector<std::string>& provenance = {});

}  // namespace quesim
