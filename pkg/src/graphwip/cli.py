"""Command-line entry point.

Verbs: datagen, extract-edges, bpe, train-edges, eval-edges, train, eval,
suite, report.  Global flags --seed / --config / --out apply to every verb;
the config file is a JSON document with sections "gen", "dataset", "block",
"train", "edge_train" and "suite", each holding the corresponding dataclass
fields.  Unknown sections or fields are rejected.  Exit code is 0 only when
the verb ran to full completion (a suite with gaps exits 1).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .datagen.dataset import DatasetSpec, build_dataset, load_records
from .datagen.generator import GenConfig
from .graphs.edges import extract_edges
from .harness.bpe import learn_bpe
from .harness.loop import TrainConfig
from .harness.records import read_records
from .harness.report import emit_report, report_from_dir
from .harness.suite import SUITE_NAMES, SuiteConfig, run_suite
from .harness.training import (
    eval_from_snapshot,
    train_baseline,
    train_completion,
    train_edge_model,
    train_varmisuse,
)
from .models.edge_model import EdgeModelConfig
from .models.modes import MODE_NAMES, EdgeMode
from .nn.layers import BlockConfig

CONFIG_SECTIONS = ("gen", "dataset", "block", "train", "edge_train", "suite",
                   "_comment")
DATASET_KEYS = ("task", "k", "buggy_fraction", "n_merges", "splits")
SUITE_KEYS = ("seeds", "tau_grid", "probe_epochs", "gen_seed", "ks",
              "varmisuse_context")


class ConfigError(Exception):
    pass


def _reject_unknown(d: dict, allowed, label: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {label} keys: {', '.join(unknown)}")


def _dataclass_from(cls, d: dict, label: str):
    _reject_unknown(d, (f.name for f in dataclasses.fields(cls)), label)
    return cls(**d)


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    _reject_unknown(doc, CONFIG_SECTIONS, "config section")
    for section in ("dataset",):
        if section in doc:
            _reject_unknown(doc[section], DATASET_KEYS, "dataset")
    if "suite" in doc:
        _reject_unknown(doc["suite"], SUITE_KEYS, "suite")
    # Instantiating validates field names and value constraints eagerly.
    if "gen" in doc:
        _dataclass_from(GenConfig, doc["gen"], "gen")
    if "block" in doc:
        _dataclass_from(BlockConfig, doc["block"], "block")
    for key in ("train", "edge_train"):
        if key in doc:
            _dataclass_from(TrainConfig, doc[key], key)
    return doc


def _gen_config(doc: dict, seed: int | None) -> GenConfig:
    d = dict(doc.get("gen", {}))
    if seed is not None:
        d["seed"] = seed
    d.setdefault("seed", 0)
    gen = _dataclass_from(GenConfig, d, "gen")
    return gen


def _train_config(doc: dict, seed: int | None, key: str = "train"
                  ) -> TrainConfig:
    d = dict(doc.get(key, {}))
    if seed is not None:
        d["seed"] = seed
    return _dataclass_from(TrainConfig, d, key)


def _block_config(doc: dict) -> BlockConfig | None:
    if "block" not in doc:
        return None
    return _dataclass_from(BlockConfig, doc["block"], "block")


# ---------------------------------------------------------------------------
# verb implementations


def cmd_datagen(args, doc) -> int:
    if not args.out:
        raise ConfigError("datagen requires --out")
    d = dict(doc.get("dataset", {}))
    if args.task:
        d["task"] = args.task
    if args.k is not None:
        d["k"] = args.k
    splits = d.pop("splits", None)
    spec = DatasetSpec(gen=_gen_config(doc, args.seed), **d)
    meta = build_dataset(spec, args.out, splits)
    print(json.dumps(meta, indent=1, sort_keys=True))
    return 0


def cmd_extract_edges(args, doc) -> int:
    with open(args.source) as f:
        source = f.read()
    edges = extract_edges(source, source_id=args.source)
    text = edges.to_json()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_bpe(args, doc) -> int:
    if not args.out:
        raise ConfigError("bpe requires --out")
    texts = []
    for rec in load_records(args.data, "train"):
        texts.extend(t["text"] for t in rec["tokens"])
    vocab = learn_bpe(texts, args.merges)
    with open(args.out, "w") as f:
        f.write(vocab.to_json())
    print(f"vocab size {vocab.size} -> {args.out}")
    return 0


def cmd_train_edges(args, doc) -> int:
    if not args.out:
        raise ConfigError("train-edges requires --out")
    cfg = _train_config(doc, args.seed)
    model_cfg = None
    block = _block_config(doc)
    if block is not None:
        model_cfg = EdgeModelConfig(block=block)
    out = train_edge_model(args.data, args.out, cfg, model_cfg=model_cfg,
                           causal=not args.bidi)
    print(json.dumps(out.final_metrics, indent=1, sort_keys=True))
    return 0


def cmd_eval_edges(args, doc) -> int:
    metrics = eval_from_snapshot(args.ckpt, args.data, split=args.split)
    print(json.dumps(metrics, indent=1, sort_keys=True))
    return 0


def _edge_mode(args) -> EdgeMode:
    kwargs = {"name": args.mode}
    if args.edge_ckpt:
        kwargs["edge_ckpt"] = args.edge_ckpt
    if args.tau is not None:
        kwargs["tau"] = args.tau
    return EdgeMode(**kwargs)


def cmd_train(args, doc) -> int:
    cfg = _train_config(doc, args.seed)
    block = _block_config(doc)
    if args.task == "baseline":
        out = train_baseline(args.data, args.out, cfg, block=block,
                             window=cfg.context,
                             eval_strides=(cfg.context, 5))
    elif args.task == "completion":
        out = train_completion(args.data, args.out, _edge_mode(args), cfg,
                               block=block)
    elif args.task == "varmisuse":
        out = train_varmisuse(args.data, args.out, _edge_mode(args), cfg,
                              block=block)
    else:
        raise ConfigError(f"unknown task {args.task!r}")
    print(json.dumps(out.final_metrics, indent=1, sort_keys=True))
    return 0


def cmd_eval(args, doc) -> int:
    metrics = eval_from_snapshot(args.ckpt, args.data, split=args.split,
                                 edge_ckpt=args.edge_ckpt)
    print(json.dumps(metrics, indent=1, sort_keys=True))
    return 0


def cmd_suite(args, doc) -> int:
    if not args.out:
        raise ConfigError("suite requires --out")
    d = dict(doc.get("suite", {}))
    for key in ("seeds", "tau_grid", "ks"):
        if key in d:
            d[key] = tuple(d[key])
    kwargs = dict(data_root=args.data_root or os.path.join(args.out, "data"),
                  out_dir=args.out, train=_train_config(doc, args.seed),
                  **d)
    if "edge_train" in doc:
        kwargs["edge_train"] = _train_config(doc, args.seed, "edge_train")
    cfg = SuiteConfig(**kwargs)
    result = run_suite(args.name, cfg)
    emit_report(result.records, args.out,
                [dataclasses.asdict(g) for g in result.gaps])
    print(f"suite {result.name}: {len(result.records)} records, "
          f"{len(result.gaps)} gaps")
    for gap in result.gaps:
        print(f"  gap: {gap.cell} seed={gap.seed}: {gap.error}",
              file=sys.stderr)
    return 0 if result.complete else 1


def cmd_report(args, doc) -> int:
    if not args.out:
        raise ConfigError("report requires --out")
    if os.path.isdir(args.records):
        paths = report_from_dir(args.records, args.out)
    else:
        paths = emit_report(read_records(args.records), args.out)
    print(json.dumps(paths, indent=1, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="graphwip",
        description="Learned program-graph edges for code models.")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--config", default=None, help="JSON config document")
    p.add_argument("--out", default=None, help="output directory or file")
    # The same flags are accepted after the verb; a post-verb value wins.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="verb", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sp = add_parser("datagen", help="build a synthetic corpus")
    sp.add_argument("--task", choices=("completion", "varmisuse"),
                    default=None)
    sp.add_argument("--k", type=int, default=None,
                    help="corruptions per file")
    sp.set_defaults(fn=cmd_datagen)

    sp = add_parser("extract-edges",
                        help="print program-graph edges for a source file")
    sp.add_argument("source")
    sp.set_defaults(fn=cmd_extract_edges)

    sp = add_parser("bpe", help="learn a subword vocabulary")
    sp.add_argument("--data", required=True, help="dataset directory")
    sp.add_argument("--merges", type=int, default=500)
    sp.set_defaults(fn=cmd_bpe)

    sp = add_parser("train-edges", help="train the edge model")
    sp.add_argument("--data", required=True)
    sp.add_argument("--bidi", action="store_true",
                    help="bidirectional encoder (for varmisuse transfer)")
    sp.set_defaults(fn=cmd_train_edges)

    sp = add_parser("eval-edges", help="evaluate an edge checkpoint")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--split", default="test")
    sp.set_defaults(fn=cmd_eval_edges)

    sp = add_parser("train", help="train a task model")
    sp.add_argument("--task", required=True,
                    choices=("completion", "varmisuse", "baseline"))
    sp.add_argument("--data", required=True)
    sp.add_argument("--mode", default="agnostic", choices=MODE_NAMES)
    sp.add_argument("--edge-ckpt", default=None)
    sp.add_argument("--tau", type=float, default=None)
    sp.set_defaults(fn=cmd_train)

    sp = add_parser("eval", help="evaluate a task checkpoint")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--split", default="test")
    sp.add_argument("--edge-ckpt", default=None,
                    help="override the edge checkpoint path")
    sp.set_defaults(fn=cmd_eval)

    sp = add_parser("suite", help="run an experiment suite")
    sp.add_argument("name", choices=SUITE_NAMES)
    sp.add_argument("--data-root", default=None,
                    help="dataset cache (default: <out>/data)")
    sp.set_defaults(fn=cmd_suite)

    sp = add_parser("report", help="render records into CSV + Markdown")
    sp.add_argument("--records", required=True,
                    help="records directory or a single records file")
    sp.set_defaults(fn=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = load_config(args.config)
        return args.fn(args, doc)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
