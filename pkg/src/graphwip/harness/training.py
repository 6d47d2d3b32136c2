"""Task-level training drivers: edge model, completion, variable misuse,
and the baseline subword LM.  Each driver wires datasets, a model, an
edge-mode provider, and the optimizer loop, then evaluates on the test
split and persists a checkpoint plus metrics records."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import numpy as np

from ..datagen.dataset import load_records, load_vocab
from ..graphs.edges import EdgeSet
from ..graphs.metrics import EdgeMetrics, pool_edge_metrics
from ..models.baseline_lm import BaselineLM, baseline_sliding_eval, record_stream
from ..models.completion import (
    CompletionModel,
    aggregate_completion,
    score_window,
)
from ..models.edge_model import (
    EdgeModel,
    EdgeModelConfig,
    edge_forward,
    edge_loss,
    predict_edges,
)
from ..models.modes import EdgeMode, EdgeProvider, load_edge_model
from ..models.varmisuse import (
    VarMisuseModel,
    aggregate_varmisuse,
    score_example,
    varmisuse_loss,
)
from ..nn.layers import BlockConfig
from ..nn.snapshot import load_snapshot, restore_params, save_snapshot
from ..nn.tensor import no_grad
from .loop import TrainConfig, TrainResult, train_loop
from .records import MetricsRecord, append_records
from .windows import sample_window, slice_edges, test_windows


@dataclass
class RunOutcome:
    ckpt_dir: str | None
    result: TrainResult
    final_metrics: dict
    records: list[MetricsRecord] = field(default_factory=list)


def _mean_loss(losses):
    total = losses[0]
    for l in losses[1:]:
        total = total + l
    return total * (1.0 / len(losses))


def _true_edges(rec: dict) -> list[tuple[int, int, int]] | None:
    edges = rec.get("edges")
    if edges is None:
        return None
    return [tuple(e) for e in edges]


def _window_slices(rec: dict, off: int, length: int
                   ) -> tuple[list[list[int]], list[tuple[int, int, int]] | None]:
    subs = rec["subwords"][off: off + length]
    edges = _true_edges(rec)
    if edges is not None:
        edges = slice_edges(edges, off, length)
    return subs, edges


# ---------------------------------------------------------------------------
# edge model


def _edge_pairs_for(model: EdgeModel, recs: list[dict], context: int,
                    windows_per_file: int = 1
                    ) -> list[tuple[EdgeSet, EdgeSet]]:
    pairs = []
    for rec in recs:
        edges = _true_edges(rec)
        if edges is None:
            continue
        wins = test_windows(len(rec["subwords"]), context)[:windows_per_file]
        cache: dict[tuple[int, int], tuple[EdgeSet, EdgeSet]] = {}
        for off, length in wins:
            # Short files repeat the same window; score it once, keep the
            # pair once per listed window.
            pair = cache.get((off, length))
            if pair is None:
                subs = rec["subwords"][off: off + length]
                truth = EdgeSet.from_iter(
                    length, slice_edges(edges, off, length),
                    source_id=rec["id"])
                logits = edge_forward(model, subs)
                pair = (predict_edges(logits.data, source_id=rec["id"]),
                        truth)
                cache[(off, length)] = pair
            pairs.append(pair)
    return pairs


def evaluate_edge_model(model: EdgeModel, recs: list[dict], context: int,
                        windows_per_file: int = 3) -> EdgeMetrics:
    return pool_edge_metrics(
        _edge_pairs_for(model, recs, context, windows_per_file))


def train_edge_model(data_dir: str, out_dir: str, cfg: TrainConfig,
                     model_cfg: EdgeModelConfig | None = None,
                     causal: bool = True) -> RunOutcome:
    vocab = load_vocab(data_dir)
    train = [r for r in load_records(data_dir, "train") if "edges" in r]
    valid = [r for r in load_records(data_dir, "valid") if "edges" in r]
    if not train:
        raise ValueError("no edge-annotated training records")

    model_cfg = model_cfg or EdgeModelConfig()
    model_cfg.block.causal = causal
    model_cfg.block.dropout = cfg.dropout
    model_cfg.block.subword_dropout = cfg.subword_dropout
    model = EdgeModel(model_cfg, vocab.size, vocab.unk_id, vocab.pad_id,
                      seed=cfg.seed)
    params = model.parameters()

    def batch_loss(step, rng):
        idx = rng.integers(0, len(train), size=cfg.batch_size)
        losses = []
        for i in idx:
            rec = train[int(i)]
            off, length = sample_window(len(rec["subwords"]), cfg.context, rng)
            subs, edges = _window_slices(rec, off, length)
            truth = EdgeSet.from_iter(length, edges or [],
                                      source_id=rec["id"])
            logits = model.forward(subs, training=True, rng=rng)
            losses.append(edge_loss(logits, truth, cfg.gamma))
        return f"step{step}", _mean_loss(losses)

    def evaluate():
        m = evaluate_edge_model(model, valid[: cfg.eval_examples],
                                cfg.context, windows_per_file=1)
        return -m.micro.f_score, {"micro_f": m.micro.f_score}

    result = train_loop(params=params, batch_loss=batch_loss,
                        evaluate=evaluate, cfg=cfg,
                        steps_per_epoch=max(1, len(train) // cfg.batch_size))

    final = evaluate_edge_model(model, valid, cfg.context)
    config = {
        "kind": "edge-model",
        "model": model_cfg.to_dict(),
        "vocab_size": vocab.size,
        "unk_id": vocab.unk_id,
        "pad_id": vocab.pad_id,
        "causal": causal,
        "train": cfg.to_dict(),
    }
    save_snapshot(out_dir, params, config, cfg.seed, result.best_step)
    metrics = {"micro_f": final.micro.f_score}
    for name, prf in final.per_type.items():
        metrics[f"f_{name}"] = prf.f_score
        metrics[f"p_{name}"] = prf.precision
        metrics[f"r_{name}"] = prf.recall
    recs = [MetricsRecord(step=result.best_step, split="valid", task="edges",
                          mode="supervised", seed=cfg.seed, metrics=metrics,
                          wall_time=result.wall_time)]
    append_records(os.path.join(out_dir, "metrics.jsonl"), recs)
    return RunOutcome(out_dir, result, metrics, recs)


# ---------------------------------------------------------------------------
# completion


def _completion_models(data_dir: str, mode: EdgeMode, block: BlockConfig,
                       cfg: TrainConfig):
    vocab = load_vocab(data_dir)
    model = CompletionModel(block, vocab.size, vocab.bos_id, vocab.eot_id,
                            vocab.unk_id, vocab.pad_id, seed=cfg.seed,
                            with_edges=mode.name != "agnostic")
    provider = EdgeProvider(mode, vocab.size, vocab.unk_id, vocab.pad_id,
                            causal=True)
    return vocab, model, provider


def eval_completion(model: CompletionModel, provider: EdgeProvider,
                    recs: list[dict], context: int,
                    windows_per_file: int = 3) -> dict:
    scores = []
    for rec in recs:
        cache: dict[tuple[int, int], dict] = {}
        for off, length in test_windows(len(rec["subwords"]),
                                        context)[:windows_per_file]:
            sc = cache.get((off, length))
            if sc is None:
                subs, edges = _window_slices(rec, off, length)
                ectx = provider.context_for(subs, edges, shift=1,
                                            training=False)
                sc = score_window(model, subs, ectx)
                cache[(off, length)] = sc
            scores.append(sc)
    return aggregate_completion(scores)


def train_completion(data_dir: str, out_dir: str | None, mode: EdgeMode,
                     cfg: TrainConfig,
                     block: BlockConfig | None = None) -> RunOutcome:
    block = block or BlockConfig()
    block.causal = True
    block.dropout = cfg.dropout
    block.subword_dropout = cfg.subword_dropout
    vocab, model, provider = _completion_models(data_dir, mode, block, cfg)
    train = load_records(data_dir, "train")
    valid = load_records(data_dir, "valid")
    test = load_records(data_dir, "test")

    params = dict(model.parameters())
    params.update(provider.edge_parameters())

    def batch_loss(step, rng):
        idx = rng.integers(0, len(train), size=cfg.batch_size)
        losses = []
        for i in idx:
            rec = train[int(i)]
            off, length = sample_window(len(rec["subwords"]), cfg.context, rng)
            subs, edges = _window_slices(rec, off, length)
            ectx = provider.context_for(subs, edges, shift=1, training=True,
                                        rng=rng)
            losses.append(model.window_loss(subs, ectx, training=True,
                                            rng=rng))
        return f"step{step}", _mean_loss(losses)

    def evaluate():
        m = eval_completion(model, provider, valid[: cfg.eval_examples],
                            cfg.context, windows_per_file=1)
        return m["token_ppl"], m

    result = train_loop(params=params, batch_loss=batch_loss,
                        evaluate=evaluate, cfg=cfg,
                        steps_per_epoch=max(1, len(train) // cfg.batch_size))

    final = eval_completion(model, provider, test, cfg.context)
    tau = cfg.tau if mode.trains_edge_model else None
    recs = [MetricsRecord(step=result.best_step, split="test",
                          task="completion", mode=mode.name, seed=cfg.seed,
                          metrics=final, wall_time=result.wall_time, tau=tau)]
    if out_dir:
        config = {"kind": "completion", "mode": dataclasses.asdict(mode),
                  "block": vars(block).copy(), "vocab_size": vocab.size,
                  "train": cfg.to_dict()}
        save_snapshot(out_dir, params, config, cfg.seed, result.best_step)
        append_records(os.path.join(out_dir, "metrics.jsonl"), recs)
    return RunOutcome(out_dir, result, final, recs)


# ---------------------------------------------------------------------------
# variable misuse


def eval_varmisuse(model: VarMisuseModel, provider: EdgeProvider,
                   recs: list[dict]) -> dict:
    scores = []
    for rec in recs:
        bug = rec.get("bug")
        ectx = provider.context_for(rec["subwords"], _true_edges(rec),
                                    shift=1, training=False)
        scores.append(score_example(
            model, rec["subwords"], ectx,
            None if bug is None else bug["loc"],
            None if bug is None else tuple(bug["repairs"])))
    return aggregate_varmisuse(scores)


def train_varmisuse(data_dir: str, out_dir: str | None, mode: EdgeMode,
                    cfg: TrainConfig,
                    block: BlockConfig | None = None) -> RunOutcome:
    block = block or BlockConfig()
    block.causal = False
    block.dropout = cfg.dropout
    block.subword_dropout = cfg.subword_dropout
    vocab = load_vocab(data_dir)
    model = VarMisuseModel(block, vocab.size, vocab.bos_id, vocab.unk_id,
                           vocab.pad_id, seed=cfg.seed,
                           with_edges=mode.name != "agnostic")
    provider = EdgeProvider(mode, vocab.size, vocab.unk_id, vocab.pad_id,
                            causal=False)

    def fits(rec):
        return len(rec["subwords"]) <= cfg.context

    train = [r for r in load_records(data_dir, "train") if fits(r)]
    valid = [r for r in load_records(data_dir, "valid") if fits(r)]
    test = [r for r in load_records(data_dir, "test") if fits(r)]
    if not train:
        raise ValueError(f"no examples fit context {cfg.context}")

    params = dict(model.parameters())
    params.update(provider.edge_parameters())

    def batch_loss(step, rng):
        idx = rng.integers(0, len(train), size=cfg.batch_size)
        losses = []
        for i in idx:
            rec = train[int(i)]
            bug = rec.get("bug")
            ectx = provider.context_for(rec["subwords"], _true_edges(rec),
                                        shift=1, training=True, rng=rng)
            loc, rep = model.forward(rec["subwords"], ectx, training=True,
                                     rng=rng)
            losses.append(varmisuse_loss(
                loc, rep, None if bug is None else bug["loc"],
                None if bug is None else tuple(bug["repairs"])))
        return f"step{step}", _mean_loss(losses)

    def evaluate():
        m = eval_varmisuse(model, provider, valid[: cfg.eval_examples])
        rep = m["repair"] if np.isfinite(m["repair"]) else 0.0
        return -(m["localization"] + rep) / 2.0, m

    result = train_loop(params=params, batch_loss=batch_loss,
                        evaluate=evaluate, cfg=cfg,
                        steps_per_epoch=max(1, len(train) // cfg.batch_size))

    final = eval_varmisuse(model, provider, test)
    tau = cfg.tau if mode.trains_edge_model else None
    recs = [MetricsRecord(step=result.best_step, split="test",
                          task="varmisuse", mode=mode.name, seed=cfg.seed,
                          metrics=final, wall_time=result.wall_time, tau=tau)]
    if out_dir:
        config = {"kind": "varmisuse", "mode": dataclasses.asdict(mode),
                  "block": vars(block).copy(), "vocab_size": vocab.size,
                  "train": cfg.to_dict()}
        save_snapshot(out_dir, params, config, cfg.seed, result.best_step)
        append_records(os.path.join(out_dir, "metrics.jsonl"), recs)
    return RunOutcome(out_dir, result, final, recs)


# ---------------------------------------------------------------------------
# baseline LM


def train_baseline(data_dir: str, out_dir: str | None, cfg: TrainConfig,
                   block: BlockConfig | None = None, window: int = 256,
                   eval_strides: tuple[int, ...] = ()) -> RunOutcome:
    block = block or BlockConfig()
    block.causal = True
    block.dropout = cfg.dropout
    block.subword_dropout = 0.0   # single-subword inputs; UNK noising off
    vocab = load_vocab(data_dir)
    model = BaselineLM(block, vocab.size, vocab.bos_id, vocab.eot_id,
                       vocab.unk_id, vocab.pad_id, seed=cfg.seed)
    train = load_records(data_dir, "train")
    valid = load_records(data_dir, "valid")
    test = load_records(data_dir, "test")
    train_streams = [record_stream(r["subwords"], vocab.eot_id) for r in train]
    valid_streams = [record_stream(r["subwords"], vocab.eot_id) for r in valid]
    test_streams = [record_stream(r["subwords"], vocab.eot_id) for r in test]

    params = model.parameters()

    def batch_loss(step, rng):
        idx = rng.integers(0, len(train_streams), size=cfg.batch_size)
        losses = []
        for i in idx:
            stream = train_streams[int(i)]
            off, length = sample_window(len(stream), window, rng)
            losses.append(model.window_loss(stream[off: off + length],
                                            training=True, rng=rng))
        return f"step{step}", _mean_loss(losses)

    def evaluate():
        m = baseline_sliding_eval(model, valid_streams[: cfg.eval_examples],
                                  window, window)
        return m["subword_ppl"], m

    result = train_loop(params=params, batch_loss=batch_loss,
                        evaluate=evaluate, cfg=cfg,
                        steps_per_epoch=max(1, len(train_streams)
                                            // cfg.batch_size))

    final = {}
    recs = []
    strides = eval_strides or (window,)
    for stride in strides:
        m = baseline_sliding_eval(model, test_streams, window, stride)
        final[f"stride_{stride}"] = m
        recs.append(MetricsRecord(
            step=result.best_step, split="test", task="baseline",
            mode=f"stride-{stride}", seed=cfg.seed, metrics=m,
            wall_time=result.wall_time))
    if out_dir:
        config = {"kind": "baseline", "block": vars(block).copy(),
                  "vocab_size": vocab.size, "window": window,
                  "train": cfg.to_dict()}
        save_snapshot(out_dir, params, config, cfg.seed, result.best_step)
        append_records(os.path.join(out_dir, "metrics.jsonl"), recs)
    return RunOutcome(out_dir, result, final, recs)


# ---------------------------------------------------------------------------
# evaluation from saved checkpoints


def _mode_from_manifest(raw, edge_ckpt: str | None) -> EdgeMode:
    d = {"name": raw} if isinstance(raw, str) else dict(raw)
    if d.get("type_subset") is not None:
        d["type_subset"] = tuple(d["type_subset"])
    if edge_ckpt:
        d["edge_ckpt"] = edge_ckpt
    return EdgeMode(**d)


def eval_from_snapshot(ckpt_dir: str, data_dir: str, split: str = "test",
                       edge_ckpt: str | None = None,
                       strides: tuple[int, ...] = ()) -> dict:
    """Rebuild the model a checkpoint describes, restore its parameters and
    score the requested split."""
    arrays, manifest = load_snapshot(ckpt_dir)
    config = manifest["config"]
    kind = config.get("kind")
    vocab = load_vocab(data_dir)
    if vocab.size != config["vocab_size"]:
        raise ValueError(
            f"checkpoint vocab size {config['vocab_size']} != dataset "
            f"vocab size {vocab.size}")
    recs = load_records(data_dir, split)

    if kind == "edge-model":
        model, _ = load_edge_model(ckpt_dir)
        context = config["train"]["context"]
        m = evaluate_edge_model(model, recs, context)
        out = {"micro_f": m.micro.f_score}
        for name, prf in m.per_type.items():
            out[f"f_{name}"] = prf.f_score
            out[f"p_{name}"] = prf.precision
            out[f"r_{name}"] = prf.recall
        return out

    block = BlockConfig(**config["block"])
    tcfg = TrainConfig(**config["train"])
    if kind == "completion":
        mode = _mode_from_manifest(config["mode"], edge_ckpt)
        model = CompletionModel(block, vocab.size, vocab.bos_id,
                                vocab.eot_id, vocab.unk_id, vocab.pad_id,
                                seed=tcfg.seed,
                                with_edges=mode.name != "agnostic")
        provider = EdgeProvider(mode, vocab.size, vocab.unk_id, vocab.pad_id,
                                causal=True)
        params = dict(model.parameters())
        params.update(provider.edge_parameters())
        restore_params(params, arrays)
        return eval_completion(model, provider, recs, tcfg.context)
    if kind == "varmisuse":
        mode = _mode_from_manifest(config["mode"], edge_ckpt)
        model = VarMisuseModel(block, vocab.size, vocab.bos_id, vocab.unk_id,
                               vocab.pad_id, seed=tcfg.seed,
                               with_edges=mode.name != "agnostic")
        provider = EdgeProvider(mode, vocab.size, vocab.unk_id, vocab.pad_id,
                                causal=False)
        params = dict(model.parameters())
        params.update(provider.edge_parameters())
        restore_params(params, arrays)
        fits = [r for r in recs if len(r["subwords"]) <= tcfg.context]
        return eval_varmisuse(model, provider, fits)
    if kind == "baseline":
        model = BaselineLM(block, vocab.size, vocab.bos_id, vocab.eot_id,
                           vocab.unk_id, vocab.pad_id, seed=tcfg.seed)
        restore_params(model.parameters(), arrays)
        window = config["window"]
        streams = [record_stream(r["subwords"], vocab.eot_id) for r in recs]
        out = {}
        for stride in (strides or (window,)):
            out[f"stride_{stride}"] = baseline_sliding_eval(
                model, streams, window, stride)
        return out
    raise ValueError(f"unknown checkpoint kind {kind!r}")
