"""Synthetic corpus generation, WIP corruptions, and misuse injection."""

from .corrupt import (
    CORRUPTION_KINDS,
    PUNCT_MARKS,
    TextEdit,
    apply_corruptions,
    apply_edits,
    corrupt_delete,
    corrupt_indent,
    corrupt_keyword,
    corrupt_punct,
    map_offset,
)
from .dataset import (
    DESK_SPLITS,
    DatasetSpec,
    build_dataset,
    load_records,
    load_vocab,
)
from .generator import GenConfig, generate_program
from .misuse import BugAnnotation, inject_misuse

__all__ = [
    "CORRUPTION_KINDS", "PUNCT_MARKS", "TextEdit", "apply_corruptions",
    "apply_edits", "corrupt_delete", "corrupt_indent", "corrupt_keyword",
    "corrupt_punct", "map_offset",
    "DESK_SPLITS", "DatasetSpec", "build_dataset", "load_records", "load_vocab",
    "GenConfig", "generate_program", "BugAnnotation", "inject_misuse",
]
