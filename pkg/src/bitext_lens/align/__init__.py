"""IBM Model 1 lexical alignment."""
from .model1 import (
    Bitext,
    corpus_subset,
    em_step,
    expected_counts,
    invert_table,
    log_likelihood,
    source_priors,
    top_alignments,
    train,
    viterbi_align,
    viterbi_corpus,
)
from .table import (
    NULL,
    AlignmentLinks,
    ModelFileError,
    NumericalError,
    TrainingConfig,
    TrainingDiagnostics,
    TranslationTable,
    load_table,
    save_table,
)

__all__ = [
    "NULL",
    "AlignmentLinks",
    "Bitext",
    "ModelFileError",
    "NumericalError",
    "TrainingConfig",
    "TrainingDiagnostics",
    "TranslationTable",
    "corpus_subset",
    "em_step",
    "expected_counts",
    "invert_table",
    "load_table",
    "log_likelihood",
    "save_table",
    "source_priors",
    "top_alignments",
    "train",
    "viterbi_align",
    "viterbi_corpus",
]
