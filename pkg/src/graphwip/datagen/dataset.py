"""Dataset builds: generate, optionally inject a bug, optionally corrupt,
annotate with edges where the text still parses, and write JSONL splits.

The subword vocabulary is always learned from the *clean* train-split
token texts, so datasets built from the same generator config share ids
regardless of task/corruption settings (checkpoints stay compatible).
Builds are byte-identical for identical (config, seed): records carry no
timestamps and JSON keys are emitted in sorted order.
"""

from __future__ import annotations

import dataclasses
import json
import os
import random
from dataclasses import dataclass

from ..graphs.edges import AnalysisError, extract_edges
from ..harness.bpe import BpeVocab, learn_bpe
from ..minipy.lexer import tokenize
from .corrupt import apply_corruptions
from .generator import GenConfig, generate_program
from .misuse import inject_misuse

SPLIT_OFFSETS = {"train": 0, "valid": 1_000_000, "test": 2_000_000}
DESK_SPLITS = {"train": 2000, "valid": 200, "test": 200}


@dataclass(frozen=True)
class DatasetSpec:
    gen: GenConfig
    task: str = "completion"  # completion | varmisuse
    k: int = 0  # corruptions per file
    buggy_fraction: float = 1.0
    n_merges: int = 500

    def __post_init__(self):
        if self.task not in ("completion", "varmisuse"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if not 0.0 <= self.buggy_fraction <= 1.0:
            raise ValueError("buggy_fraction must be in [0,1]")


def _atomic_write(path: str, data: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _clean_sources(spec: DatasetSpec, split: str, n: int) -> list[str]:
    base = SPLIT_OFFSETS[split]
    return [generate_program(spec.gen, base + i) for i in range(n)]


def learn_vocab(spec: DatasetSpec, n_train: int) -> BpeVocab:
    texts = []
    for src in _clean_sources(spec, "train", n_train):
        for tok in tokenize(src).tokens:
            if tok.span[1] > tok.span[0]:
                texts.append(tok.text)
    return learn_bpe(texts, spec.n_merges)


def _make_record(spec: DatasetSpec, vocab: BpeVocab, split: str, i: int,
                 clean: str) -> dict:
    rid = f"{split}-{i:05d}"
    text = clean
    bug = None
    corruptions: list[dict] = []

    if spec.task == "varmisuse":
        bug_rng = random.Random(f"{spec.gen.seed}:{split}:{i}:bug")
        if bug_rng.random() < spec.buggy_fraction:
            text, ann = inject_misuse(text, bug_rng)
            bug = ann
        if spec.k > 0:
            cor_rng = random.Random(f"{spec.gen.seed}:{split}:{i}:cor")
            protected: frozenset[int] = frozenset()
            stream = tokenize(text)
            if bug is not None:
                idxs = {bug.bug_loc, *bug.repair_targets}
                protected = frozenset(stream.tokens[t].span[0] for t in idxs)
            text, corruptions, offmap = apply_corruptions(
                text, spec.k, cor_rng, protected)
            if bug is not None:
                new_stream = tokenize(text)
                by_start = {}
                for j, t in enumerate(new_stream.tokens):
                    by_start[(t.span[0], t.kind, t.text)] = j
                old = stream.tokens

                def relocate(t: int) -> int:
                    key = (offmap[old[t].span[0]], old[t].kind, old[t].text)
                    return by_start[key]

                bug = dataclasses.replace(
                    bug, bug_loc=relocate(bug.bug_loc),
                    repair_targets=tuple(sorted(relocate(t)
                                                for t in bug.repair_targets)))

    stream = tokenize(text)
    record: dict = {
        "id": rid,
        "source": text,
        "tokens": [{"kind": t.kind, "text": t.text} for t in stream.tokens],
        "subwords": [vocab.encode_token(t.kind, t.text) for t in stream.tokens],
        "corruptions": corruptions,
    }
    try:
        record["edges"] = [list(e) for e in extract_edges(text).edges]
    except AnalysisError:
        pass  # ill-formed by design; edges stay absent
    if spec.task == "varmisuse" and bug is not None:
        record["bug"] = {"loc": bug.bug_loc,
                         "repairs": list(bug.repair_targets),
                         "original": bug.original_name,
                         "wrong": bug.wrong_name}
    return record


def build_dataset(spec: DatasetSpec, out_dir: str,
                  splits: dict[str, int] | None = None) -> dict:
    splits = dict(splits or DESK_SPLITS)
    unknown = set(splits) - set(SPLIT_OFFSETS)
    if unknown:
        raise ValueError(f"unknown splits: {sorted(unknown)}")
    os.makedirs(out_dir, exist_ok=True)

    vocab = learn_vocab(spec, splits.get("train", DESK_SPLITS["train"]))
    _atomic_write(os.path.join(out_dir, "vocab.json"), vocab.to_json())

    counts = {}
    for split, n in splits.items():
        lines = []
        for i, clean in enumerate(_clean_sources(spec, split, n)):
            rec = _make_record(spec, vocab, split, i, clean)
            lines.append(json.dumps(rec, sort_keys=True))
        _atomic_write(os.path.join(out_dir, f"{split}.jsonl"),
                      "\n".join(lines) + ("\n" if lines else ""))
        counts[split] = n

    meta = {
        "task": spec.task, "k": spec.k, "buggy_fraction": spec.buggy_fraction,
        "n_merges": spec.n_merges, "splits": counts,
        "gen": dataclasses.asdict(spec.gen),
        "vocab_size": vocab.size,
    }
    _atomic_write(os.path.join(out_dir, "meta.json"),
                  json.dumps(meta, sort_keys=True, indent=2))
    return meta


def load_records(data_dir: str, split: str) -> list[dict]:
    path = os.path.join(data_dir, f"{split}.jsonl")
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_vocab(data_dir: str) -> BpeVocab:
    with open(os.path.join(data_dir, "vocab.json"), encoding="utf-8") as fh:
        return BpeVocab.from_json(fh.read())
