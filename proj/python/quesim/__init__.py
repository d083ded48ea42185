"""Duplicate-question detection: Siamese GRU plus secondary classifiers."""

from quesim._core import (
    DuplicateGraph,
    GruModel,
    SecondaryModel,
    augment_csv,
    encode_tokens,
    evaluate,
    length_histogram,
    log_loss,
    preprocess,
    run_all,
    tfidf_word_match,
    tokenize,
    word_match_share,
)

__all__ = [
    "DuplicateGraph",
    "GruModel",
    "SecondaryModel",
    "augment_csv",
    "encode_tokens",
    "evaluate",
    "length_histogram",
    "log_loss",
    "preprocess",
    "run_all",
    "tfidf_word_match",
    "tokenize",
    "word_match_share",
]
