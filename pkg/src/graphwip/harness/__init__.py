"""Training harness: BPE, windows, optimizer loop, drivers, suites.

Only leaf modules re-export here; the training drivers and experiment
suites import dataset code, which itself needs `harness.bpe`, so they are
reached as submodules (`graphwip.harness.training`, `graphwip.harness.suite`,
`graphwip.harness.report`) to keep imports acyclic.
"""

from .bpe import (
    BOS,
    DEDENT_SYM,
    EOT,
    INDENT_SYM,
    MAX_SUBWORDS,
    NEWLINE_SYM,
    PAD,
    UNK,
    BpeVocab,
    learn_bpe,
)
from .loop import EvalPoint, TrainConfig, TrainingDiverged, TrainResult, train_loop
from .records import MetricsRecord, append_records, read_records, seed_mean_std
from .windows import sample_window, slice_edges, test_windows

__all__ = [
    "BOS",
    "BpeVocab",
    "DEDENT_SYM",
    "EOT",
    "EvalPoint",
    "INDENT_SYM",
    "MAX_SUBWORDS",
    "MetricsRecord",
    "NEWLINE_SYM",
    "PAD",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "UNK",
    "append_records",
    "learn_bpe",
    "read_records",
    "sample_window",
    "seed_mean_std",
    "slice_edges",
    "test_windows",
    "train_loop",
]
