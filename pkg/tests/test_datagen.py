"""Generator, corruption, and misuse-injection behavior, plus dataset files."""

import json
import random

import pytest

from graphwip.datagen.corrupt import (
    CORRUPTION_KINDS,
    apply_corruptions,
    corrupt_delete,
    corrupt_indent,
    corrupt_keyword,
)
from graphwip.datagen.dataset import DatasetSpec, build_dataset
from graphwip.datagen.generator import GenConfig, generate_program
from graphwip.datagen.misuse import inject_misuse
from graphwip.minipy import ParseError, parse, tokenize

# Small, quick snippets exercising every statement form; used as fixed
# targets for the per-kind corruption rates.
SNIPPETS = [
    "def f(a, b):\n    c = a + b\n    return c\n",
    "def g(x):\n    if x < 2:\n        return x\n    else:\n        return x - 1\n",
    "def h(n):\n    while n < 3:\n        n = n + 1\n    return n\n",
    "def f(a):\n    b = a\n    if b:\n        c = b\n    else:\n        c = a\n    return c\n",
    "def f(p):\n    q = p.size\n    return q\n",
    "def f(xs):\n    s = 0\n    for x in xs:\n        s = s + x\n    return s\n",
    "def one():\n    return 1\n\ndef two(a):\n    b = one()\n    return b + a\n",
    "def f(a, b):\n    c = a and b\n    return not c\n",
    "def f(o, v):\n    o.push(v)\n    return o.size\n",
    "def f(x):\n    if x:\n        if x > 1:\n            return 2\n    return x\n",
    "def f(a):\n    a = a + 1\n    a = a * 2\n    return a\n",
    "def f(x):\n    y = x\n    return y\n\ndef g(y):\n    return y\n",
]


def _parses(text: str) -> bool:
    try:
        parse(tokenize(text))
        return True
    except ParseError:
        return False


# ---------------------------------------------------------------- generator


def test_generator_deterministic():
    cfg = GenConfig(seed=7)
    assert generate_program(cfg, 3) == generate_program(cfg, 3)


def test_generator_varies_by_file_seed():
    cfg = GenConfig(seed=7)
    outs = {generate_program(cfg, i) for i in range(20)}
    assert len(outs) > 15  # collisions allowed but should be rare


def test_generator_varies_by_corpus_seed():
    assert generate_program(GenConfig(seed=0), 5) != generate_program(
        GenConfig(seed=1), 5)


def test_generated_programs_parse():
    cfg = GenConfig(seed=11)
    for i in range(50):
        src = generate_program(cfg, i)
        assert _parses(src), src


def test_generator_respects_function_count():
    cfg = GenConfig(seed=2, funcs_per_file=(2, 2))
    for i in range(10):
        src = generate_program(cfg, i)
        assert src.count("def ") == 2


def test_gen_config_validation():
    with pytest.raises(ValueError):
        GenConfig(funcs_per_file=(0, 2))
    with pytest.raises(ValueError):
        GenConfig(stmts_per_func=(1, 4))
    with pytest.raises(ValueError):
        GenConfig(n_idents=1)


# --------------------------------------------------------------- corruption


def test_apply_corruptions_logs_k_entries():
    rng = random.Random(0)
    text, log, _ = apply_corruptions(SNIPPETS[0], 3, rng, frozenset())
    assert len(log) == 3
    assert all(e["kind"] in CORRUPTION_KINDS for e in log)
    assert text != SNIPPETS[0]


def test_apply_corruptions_deterministic():
    a = apply_corruptions(SNIPPETS[1], 2, random.Random(5), frozenset())
    b = apply_corruptions(SNIPPETS[1], 2, random.Random(5), frozenset())
    assert a[0] == b[0] and a[1] == b[1]


def test_apply_corruptions_keeps_protected_tokens():
    src = SNIPPETS[0]
    stream = tokenize(src)
    # Protect both parameter names of f.
    prot = [t for t in stream.tokens if t.text in ("a", "b")][:2]
    offsets = frozenset(t.span[0] for t in prot)
    keys = {t.span[0]: (t.kind, t.text) for t in prot}
    for seed in range(30):
        text, _, offmap = apply_corruptions(src, 2, random.Random(seed), offsets)
        survivors = {(t.span[0], t.kind, t.text) for t in tokenize(text).tokens}
        for o in offsets:
            assert (offmap[o], *keys[o]) in survivors


def test_k1_breaks_parse_rate():
    # Pinned corpus statistic: with a single corruption, at least 90% of
    # generated files stop parsing (checked with a 5-point slack band).
    cfg = GenConfig(seed=3, n_files=1000)
    broken = 0
    for i in range(1000):
        src = generate_program(cfg, i)
        text, _, _ = apply_corruptions(src, 1, random.Random(i), frozenset())
        if not _parses(text):
            broken += 1
    assert broken / 1000 >= 0.85, f"break rate {broken / 1000:.3f}"


@pytest.mark.parametrize("fn,kind", [
    (corrupt_keyword, "Keyword"),
    (corrupt_delete, "Deletion"),
    (corrupt_indent, "Indentation"),
])
def test_single_kind_break_rates(fn, kind):
    # Keyword, deletion, and indentation edits should each break most
    # snippets most of the time; punctuation insertion is the flaky one
    # and carries no pinned rate.
    from graphwip.datagen.corrupt import apply_edits

    broken = total = 0
    for src in SNIPPETS:
        for seed in range(25):
            try:
                (edits, reps), entry = fn(src, random.Random(seed))
            except ValueError:
                continue
            total += 1
            if not _parses(apply_edits(src, edits, reps)):
                broken += 1
    assert total > 0
    assert broken / total >= 0.80, f"{kind}: {broken}/{total}"


def test_corruption_log_entries_have_fields():
    for seed in range(10):
        _, log, _ = apply_corruptions(SNIPPETS[2], 1, random.Random(seed),
                                      frozenset())
        (entry,) = log
        assert {"kind", "location", "detail"} <= set(entry)


# ------------------------------------------------------------------- misuse


def test_inject_misuse_preserves_parse():
    for src in SNIPPETS:
        for seed in range(5):
            try:
                bugged, _ = inject_misuse(src, random.Random(seed))
            except ValueError:
                continue  # snippet has no eligible site
            assert _parses(bugged), bugged


def test_inject_misuse_annotation_consistent():
    src = SNIPPETS[3]  # several in-scope variables, guaranteed sites
    bugged, ann = inject_misuse(src, random.Random(1))
    toks = tokenize(bugged).tokens
    assert toks[ann.bug_loc].text == ann.wrong_name
    assert ann.wrong_name != ann.original_name
    assert ann.repair_targets
    for t in ann.repair_targets:
        assert toks[t].text == ann.original_name


def test_inject_misuse_changes_exactly_one_token():
    src = SNIPPETS[0]
    bugged, ann = inject_misuse(src, random.Random(4))
    old = [t.text for t in tokenize(src).tokens]
    new = [t.text for t in tokenize(bugged).tokens]
    assert len(old) == len(new)
    diffs = [i for i, (a, b) in enumerate(zip(old, new)) if a != b]
    assert diffs == [ann.bug_loc]


def test_inject_misuse_rejects_broken_source():
    with pytest.raises(ValueError):
        inject_misuse("def f(:\n    return 1\n", random.Random(0))


def test_inject_misuse_rejects_no_sites():
    # Single variable in scope: no wrong-but-plausible alternative exists.
    with pytest.raises(ValueError):
        inject_misuse("def f(a):\n    return a\n", random.Random(0))


def test_inject_misuse_deterministic():
    src = SNIPPETS[3]
    assert inject_misuse(src, random.Random(9)) == inject_misuse(
        src, random.Random(9))


# --------------------------------------------------------------- build files


@pytest.fixture(scope="module")
def tiny_completion(tmp_path_factory):
    out = tmp_path_factory.mktemp("dsc")
    spec = DatasetSpec(gen=GenConfig(seed=0, n_files=40), task="completion",
                       k=0, n_merges=50)
    meta = build_dataset(spec, str(out),
                         splits={"train": 40, "valid": 8, "test": 8})
    return out, meta


@pytest.fixture(scope="module")
def tiny_varmisuse(tmp_path_factory):
    out = tmp_path_factory.mktemp("dsv")
    spec = DatasetSpec(gen=GenConfig(seed=0, n_files=40), task="varmisuse",
                       k=2, n_merges=50)
    meta = build_dataset(spec, str(out),
                         splits={"train": 30, "valid": 6, "test": 6})
    return out, meta


def _records(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(ln) for ln in fh if ln.strip()]


def test_dataset_files_exist(tiny_completion):
    out, meta = tiny_completion
    for name in ("vocab.json", "meta.json", "train.jsonl", "valid.jsonl",
                 "test.jsonl"):
        assert (out / name).exists()
    assert meta["splits"] == {"train": 40, "valid": 8, "test": 8}


def test_completion_records_have_edges(tiny_completion):
    out, _ = tiny_completion
    for rec in _records(out / "train.jsonl"):
        assert {"id", "source", "tokens", "subwords", "corruptions"} <= set(rec)
        assert rec["corruptions"] == []
        assert "edges" in rec
        n = len(rec["tokens"])
        for s, d, t in rec["edges"]:
            assert 0 <= s < n and 0 <= d < n
        assert len(rec["subwords"]) == n
        assert all(isinstance(w, list) for w in rec["subwords"])


def test_splits_are_disjoint(tiny_completion):
    out, _ = tiny_completion
    train = {r["source"] for r in _records(out / "train.jsonl")}
    test = {r["source"] for r in _records(out / "test.jsonl")}
    assert not train & test


def test_varmisuse_records_are_corrupted(tiny_varmisuse):
    out, _ = tiny_varmisuse
    recs = _records(out / "train.jsonl")
    assert all(len(r["corruptions"]) == 2 for r in recs)
    # k=2 corruption should leave nearly every file unparseable (no edges).
    missing = sum("edges" not in r for r in recs)
    assert missing / len(recs) >= 0.8


def test_varmisuse_bug_annotation_survives_corruption(tiny_varmisuse):
    out, _ = tiny_varmisuse
    seen = 0
    for rec in _records(out / "train.jsonl"):
        if "bug" not in rec:
            continue
        seen += 1
        bug = rec["bug"]
        toks = rec["tokens"]
        assert toks[bug["loc"]]["text"] == bug["wrong"]
        for t in bug["repairs"]:
            assert toks[t]["text"] == bug["original"]
    assert seen >= len(_records(out / "train.jsonl")) // 2


def test_dataset_build_deterministic(tmp_path, tiny_completion):
    out, _ = tiny_completion
    spec = DatasetSpec(gen=GenConfig(seed=0, n_files=40), task="completion",
                       k=0, n_merges=50)
    build_dataset(spec, str(tmp_path), splits={"train": 40, "valid": 8,
                                               "test": 8})
    for name in ("train.jsonl", "vocab.json"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_dataset_spec_validation():
    with pytest.raises(ValueError):
        DatasetSpec(gen=GenConfig(), task="summarize")
    with pytest.raises(ValueError):
        DatasetSpec(gen=GenConfig(), k=-1)
    with pytest.raises(ValueError):
        DatasetSpec(gen=GenConfig(), buggy_fraction=1.5)
    with pytest.raises(ValueError):
        build_dataset(DatasetSpec(gen=GenConfig()), "/tmp/x",
                      splits={"bogus": 1})
