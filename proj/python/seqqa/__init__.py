"""Sequence-to-sequence question answering: corpus tools, training and inference."""

from ._seqqa import (
    SeqqaError,
    Model,
    Vocabulary,
    build_vocab,
    detect_overfit,
    detokenize,
    gradcheck,
    make_copy_task,
    merge_terms,
    parse_cornell_files,
    parse_tsv_file,
    tokenize,
    train,
)

__all__ = [
    "SeqqaError",
    "Model",
    "Vocabulary",
    "build_vocab",
    "detect_overfit",
    "detokenize",
    "gradcheck",
    "make_copy_task",
    "merge_terms",
    "parse_cornell_files",
    "parse_tsv_file",
    "tokenize",
    "train",
]
