"""Experiment suites over the desk-scale corpora.

Four named suites cover the headline comparisons:

- ``completion-clean``: next-token completion on well-formed code; cells are
  the subword baseline (two eval strides), the edge-agnostic model, and the
  aware variants (fixed / tuned / true edges).
- ``varmisuse-wip``: localization + repair on corrupted code at several
  corruption counts k, cells {agnostic, aware-fixed, aware-tuned}.
- ``finetune-init``: the pretrain-vs-random edge-initialization comparison on
  well-formed buggy code, adding aware-random-init and aware-true cells.
- ``edge-ablation``: completion with true edges restricted to the five edge
  types the edge model predicts best ("easy") vs the other five ("hard").

Every cell runs once per seed and appends MetricsRecords to a per-job file
under ``<out_dir>/records/``; report emission merges those files.  A failed
cell never aborts the suite: it is recorded as a gap (cell name, seed, error)
and the remaining cells still run, so partial reports stay possible.  For the
tuned modes the gate temperature is grid-searched on the first seed's
validation objective before the full per-seed runs; the chosen value is
stamped on every tuned record.
"""

from __future__ import annotations

import dataclasses
import filecmp
import json
import os
from dataclasses import dataclass, field

from ..datagen.dataset import DatasetSpec, build_dataset
from ..datagen.generator import GenConfig
from ..graphs.edges import EDGE_TYPE_NAMES, EdgeType
from ..models.modes import EdgeMode
from .loop import TrainConfig
from .records import MetricsRecord, append_records, read_records
from .training import (
    RunOutcome,
    train_baseline,
    train_completion,
    train_edge_model,
    train_varmisuse,
)

SUITE_NAMES = ("completion-clean", "varmisuse-wip", "finetune-init",
               "edge-ablation")
TAU_GRID = (0.01, 0.1, 0.3, 1.0)


@dataclass
class SuiteConfig:
    data_root: str
    out_dir: str
    seeds: tuple[int, ...] = (0, 1, 2)
    tau_grid: tuple[float, ...] = TAU_GRID
    train: TrainConfig = field(default_factory=TrainConfig)
    edge_train: TrainConfig | None = None
    probe_epochs: int = 1
    gen_seed: int = 0
    ks: tuple[int, ...] = (1, 2, 5)
    varmisuse_context: int = 512

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed required")
        if not self.tau_grid:
            raise ValueError("tau grid must be nonempty")

    def records_dir(self) -> str:
        return os.path.join(self.out_dir, "records")


@dataclass
class CellGap:
    suite: str
    cell: str
    seed: int | None
    error: str


@dataclass
class SuiteResult:
    name: str
    records: list[MetricsRecord] = field(default_factory=list)
    gaps: list[CellGap] = field(default_factory=list)
    tau_choice: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.gaps


# ---------------------------------------------------------------------------
# shared dependencies: datasets and edge checkpoints


def ensure_completion_data(cfg: SuiteConfig) -> str:
    d = os.path.join(cfg.data_root, "completion-clean")
    if not os.path.exists(os.path.join(d, "meta.json")):
        build_dataset(DatasetSpec(gen=GenConfig(seed=cfg.gen_seed)), d)
    return d


def ensure_varmisuse_data(cfg: SuiteConfig, k: int) -> str:
    d = os.path.join(cfg.data_root, f"varmisuse-k{k}")
    if not os.path.exists(os.path.join(d, "meta.json")):
        build_dataset(
            DatasetSpec(gen=GenConfig(seed=cfg.gen_seed), task="varmisuse",
                        k=k), d)
    return d


def _check_shared_vocab(clean_dir: str, other_dir: str) -> None:
    # The edge checkpoint is trained on the clean corpus; reusing it on
    # another dataset is only sound when the subword tables are identical.
    a = os.path.join(clean_dir, "vocab.json")
    b = os.path.join(other_dir, "vocab.json")
    if not filecmp.cmp(a, b, shallow=False):
        raise ValueError(f"vocab mismatch between {clean_dir} and {other_dir}")


def ensure_edge_ckpt(cfg: SuiteConfig, causal: bool) -> str:
    name = "edges-causal" if causal else "edges-bidi"
    ckpt = os.path.join(cfg.out_dir, name)
    if not os.path.exists(os.path.join(ckpt, "manifest.json")):
        ecfg = cfg.edge_train or TrainConfig()
        train_edge_model(ensure_completion_data(cfg), ckpt, ecfg,
                         causal=causal)
    return ckpt


def edge_type_split(edge_ckpt: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Rank edge types by the checkpoint's validation F and split 5/5 into
    (easy = best-predicted, hard = rest)."""
    recs = read_records(os.path.join(edge_ckpt, "metrics.jsonl"))
    if not recs:
        raise ValueError(f"no metrics stored with edge checkpoint {edge_ckpt}")
    metrics = recs[-1].metrics
    scored = sorted(EDGE_TYPE_NAMES,
                    key=lambda n: (-metrics.get(f"f_{n}", 0.0), n))
    half = len(scored) // 2
    return tuple(scored[:half]), tuple(scored[half:])


# ---------------------------------------------------------------------------
# cell plumbing


def _record_path(cfg: SuiteConfig, suite: str, cell: str,
                 seed: int | str) -> str:
    return os.path.join(cfg.records_dir(), f"{suite}.{cell}.seed{seed}.jsonl")


def _run_cell(result: SuiteResult, cfg: SuiteConfig, cell: str,
              seed: int, fn) -> RunOutcome | None:
    try:
        out = fn()
    except Exception as e:  # cell isolation: record the gap, keep going
        result.gaps.append(CellGap(result.name, cell, seed,
                                   f"{type(e).__name__}: {e}"))
        return None
    append_records(_record_path(cfg, result.name, cell, seed), out.records)
    result.records.extend(out.records)
    return out


def _gap_all(result: SuiteResult, cells: list[str], seeds, error: str) -> None:
    for cell in cells:
        for seed in seeds:
            result.gaps.append(CellGap(result.name, cell, seed, error))


def _pick_tau(result: SuiteResult, cfg: SuiteConfig, cell: str, train_fn,
              data_dir: str, mode_fn, base_cfg: TrainConfig) -> float | None:
    """Short probe per grid point on the first seed; lowest validation
    objective wins.  Probe records go to a separate file so they never mix
    into the reported seed statistics."""
    if len(cfg.tau_grid) == 1:
        result.tau_choice[cell] = cfg.tau_grid[0]
        return cfg.tau_grid[0]
    best_tau, best_obj, probe_recs = None, None, []
    for tau in cfg.tau_grid:
        pcfg = dataclasses.replace(base_cfg, seed=cfg.seeds[0], tau=tau,
                                   max_epochs=cfg.probe_epochs)
        try:
            out = train_fn(data_dir, None, mode_fn(tau), pcfg)
        except Exception as e:
            result.gaps.append(CellGap(result.name, f"{cell}[tau={tau}]",
                                       cfg.seeds[0],
                                       f"{type(e).__name__}: {e}"))
            continue
        obj = out.result.best_objective
        probe_recs.append(MetricsRecord(
            step=out.result.best_step, split="valid", task="tau-probe",
            mode=cell, seed=cfg.seeds[0], metrics={"objective": obj},
            wall_time=out.result.wall_time, tau=tau))
        if best_obj is None or obj < best_obj:
            best_tau, best_obj = tau, obj
    if probe_recs:
        append_records(_record_path(cfg, result.name, cell, "tau-probe"),
                       probe_recs)
    if best_tau is None:
        return None
    result.tau_choice[cell] = best_tau
    return best_tau


def _write_gaps(result: SuiteResult, cfg: SuiteConfig) -> None:
    os.makedirs(cfg.records_dir(), exist_ok=True)
    path = os.path.join(cfg.records_dir(), f"{result.name}.gaps.json")
    with open(path, "w") as f:
        json.dump([dataclasses.asdict(g) for g in result.gaps], f, indent=1)


# ---------------------------------------------------------------------------
# the four suites


def run_completion_suite(cfg: SuiteConfig) -> SuiteResult:
    result = SuiteResult("completion-clean")
    data = ensure_completion_data(cfg)

    for seed in cfg.seeds:
        scfg = dataclasses.replace(cfg.train, seed=seed)
        _run_cell(result, cfg, "baseline", seed,
                  lambda c=scfg: train_baseline(
                      data, None, c, window=c.context,
                      eval_strides=(c.context, 5)))
        _run_cell(result, cfg, "agnostic", seed,
                  lambda c=scfg: train_completion(
                      data, None, EdgeMode(name="agnostic"), c))
        _run_cell(result, cfg, "aware-true", seed,
                  lambda c=scfg: train_completion(
                      data, None, EdgeMode(name="aware-true"), c))

    try:
        ckpt = ensure_edge_ckpt(cfg, causal=True)
    except Exception as e:
        _gap_all(result, ["aware-fixed", "aware-tuned"], cfg.seeds,
                 f"missing edge checkpoint: {type(e).__name__}: {e}")
        _write_gaps(result, cfg)
        return result

    tau = _pick_tau(
        result, cfg, "aware-tuned", train_completion, data,
        lambda t: EdgeMode(name="aware-tuned", edge_ckpt=ckpt, tau=t),
        cfg.train)
    for seed in cfg.seeds:
        scfg = dataclasses.replace(cfg.train, seed=seed)
        _run_cell(result, cfg, "aware-fixed", seed,
                  lambda c=scfg: train_completion(
                      data, None, EdgeMode(name="aware-fixed",
                                           edge_ckpt=ckpt), c))
        if tau is None:
            result.gaps.append(CellGap(result.name, "aware-tuned", seed,
                                       "no tau probe succeeded"))
            continue
        tcfg = dataclasses.replace(scfg, tau=tau)
        _run_cell(result, cfg, "aware-tuned", seed,
                  lambda c=tcfg: train_completion(
                      data, None, EdgeMode(name="aware-tuned", edge_ckpt=ckpt,
                                           tau=c.tau), c))
    _write_gaps(result, cfg)
    return result


def _varmisuse_cfg(cfg: SuiteConfig, seed: int) -> TrainConfig:
    return dataclasses.replace(cfg.train, seed=seed,
                               context=cfg.varmisuse_context)


def run_varmisuse_suite(cfg: SuiteConfig,
                        ks: tuple[int, ...] | None = None) -> SuiteResult:
    result = SuiteResult("varmisuse-wip")
    clean = ensure_completion_data(cfg)
    try:
        ckpt = ensure_edge_ckpt(cfg, causal=False)
    except Exception as e:
        ckpt, ckpt_err = None, f"missing edge checkpoint: {type(e).__name__}: {e}"

    for k in (ks if ks is not None else cfg.ks):
        task = f"varmisuse-k{k}"
        try:
            data = ensure_varmisuse_data(cfg, k)
            _check_shared_vocab(clean, data)
        except Exception as e:
            _gap_all(result, [f"{task}/{m}" for m in
                              ("agnostic", "aware-fixed", "aware-tuned")],
                     cfg.seeds, f"missing dataset: {type(e).__name__}: {e}")
            continue

        for seed in cfg.seeds:
            _run_cell(result, cfg, f"{task}/agnostic", seed,
                      lambda c=_varmisuse_cfg(cfg, seed): _relabel(
                          train_varmisuse(data, None,
                                          EdgeMode(name="agnostic"), c), task))
        if ckpt is None:
            _gap_all(result, [f"{task}/aware-fixed", f"{task}/aware-tuned"],
                     cfg.seeds, ckpt_err)
            continue
        tau = _pick_tau(
            result, cfg, f"{task}/aware-tuned", train_varmisuse, data,
            lambda t: EdgeMode(name="aware-tuned", edge_ckpt=ckpt, tau=t),
            _varmisuse_cfg(cfg, cfg.seeds[0]))
        for seed in cfg.seeds:
            scfg = _varmisuse_cfg(cfg, seed)
            _run_cell(result, cfg, f"{task}/aware-fixed", seed,
                      lambda c=scfg: _relabel(
                          train_varmisuse(data, None,
                                          EdgeMode(name="aware-fixed",
                                                   edge_ckpt=ckpt), c), task))
            if tau is None:
                result.gaps.append(CellGap(result.name,
                                           f"{task}/aware-tuned", seed,
                                           "no tau probe succeeded"))
                continue
            tcfg = dataclasses.replace(scfg, tau=tau)
            _run_cell(result, cfg, f"{task}/aware-tuned", seed,
                      lambda c=tcfg: _relabel(
                          train_varmisuse(data, None,
                                          EdgeMode(name="aware-tuned",
                                                   edge_ckpt=ckpt,
                                                   tau=c.tau), c), task))
    _write_gaps(result, cfg)
    return result


def _relabel(out: RunOutcome, task: str) -> RunOutcome:
    # Varmisuse cells differ only by corruption count; stamp it on the task
    # so report tables keep each k separate.
    out.records = [dataclasses.replace(r, task=task) for r in out.records]
    return out


def run_finetune_suite(cfg: SuiteConfig) -> SuiteResult:
    """Varmisuse on well-formed buggy code (k=0): the initialization
    comparison.  aware-true is applicable here because the code parses."""
    result = SuiteResult("finetune-init")
    clean = ensure_completion_data(cfg)
    task = "varmisuse-k0"
    try:
        data = ensure_varmisuse_data(cfg, k=0)
        _check_shared_vocab(clean, data)
    except Exception as e:
        _gap_all(result, [f"{task}/{m}" for m in
                          ("agnostic", "aware-true", "aware-random-init",
                           "aware-fixed", "aware-tuned")],
                 cfg.seeds, f"missing dataset: {type(e).__name__}: {e}")
        _write_gaps(result, cfg)
        return result

    for seed in cfg.seeds:
        scfg = _varmisuse_cfg(cfg, seed)
        _run_cell(result, cfg, f"{task}/agnostic", seed,
                  lambda c=scfg: _relabel(
                      train_varmisuse(data, None, EdgeMode(name="agnostic"),
                                      c), task))
        _run_cell(result, cfg, f"{task}/aware-true", seed,
                  lambda c=scfg: _relabel(
                      train_varmisuse(data, None, EdgeMode(name="aware-true"),
                                      c), task))

    try:
        ckpt = ensure_edge_ckpt(cfg, causal=False)
    except Exception as e:
        _gap_all(result,
                 [f"{task}/aware-fixed", f"{task}/aware-tuned"], cfg.seeds,
                 f"missing edge checkpoint: {type(e).__name__}: {e}")
        ckpt = None

    tau = None
    if ckpt is not None:
        tau = _pick_tau(
            result, cfg, f"{task}/aware-tuned", train_varmisuse, data,
            lambda t: EdgeMode(name="aware-tuned", edge_ckpt=ckpt, tau=t),
            _varmisuse_cfg(cfg, cfg.seeds[0]))

    for seed in cfg.seeds:
        scfg = _varmisuse_cfg(cfg, seed)
        rtau = tau if tau is not None else cfg.tau_grid[0]
        rcfg = dataclasses.replace(scfg, tau=rtau)
        _run_cell(result, cfg, f"{task}/aware-random-init", seed,
                  lambda c=rcfg, s=seed: _relabel(
                      train_varmisuse(data, None,
                                      EdgeMode(name="aware-random-init",
                                               tau=c.tau,
                                               init_seed=1000 + s), c), task))
        if ckpt is None:
            continue
        _run_cell(result, cfg, f"{task}/aware-fixed", seed,
                  lambda c=scfg: _relabel(
                      train_varmisuse(data, None,
                                      EdgeMode(name="aware-fixed",
                                               edge_ckpt=ckpt), c), task))
        if tau is None:
            result.gaps.append(CellGap(result.name, f"{task}/aware-tuned",
                                       seed, "no tau probe succeeded"))
            continue
        tcfg = dataclasses.replace(scfg, tau=tau)
        _run_cell(result, cfg, f"{task}/aware-tuned", seed,
                  lambda c=tcfg: _relabel(
                      train_varmisuse(data, None,
                                      EdgeMode(name="aware-tuned",
                                               edge_ckpt=ckpt, tau=c.tau),
                                      c), task))
    _write_gaps(result, cfg)
    return result


def run_ablation_suite(cfg: SuiteConfig) -> SuiteResult:
    """Completion with true edges restricted by predictability: the five
    types the edge model fits best vs the other five."""
    result = SuiteResult("edge-ablation")
    data = ensure_completion_data(cfg)
    cells = ["aware-true-all", "aware-true-easy", "aware-true-hard"]
    try:
        ckpt = ensure_edge_ckpt(cfg, causal=True)
        easy, hard = edge_type_split(ckpt)
    except Exception as e:
        _gap_all(result, cells, cfg.seeds,
                 f"missing edge-type ranking: {type(e).__name__}: {e}")
        _write_gaps(result, cfg)
        return result

    codes = lambda names: tuple(int(EdgeType[n]) for n in names)
    subsets = {"aware-true-all": None, "aware-true-easy": codes(easy),
               "aware-true-hard": codes(hard)}
    for seed in cfg.seeds:
        scfg = dataclasses.replace(cfg.train, seed=seed)
        for cell, subset in subsets.items():
            _run_cell(result, cfg, cell, seed,
                      lambda c=scfg, sub=subset, name=cell: _rename_mode(
                          train_completion(
                              data, None,
                              EdgeMode(name="aware-true", type_subset=sub),
                              c), name))
    _write_gaps(result, cfg)
    return result


def _rename_mode(out: RunOutcome, mode: str) -> RunOutcome:
    out.records = [dataclasses.replace(r, mode=mode) for r in out.records]
    return out


def run_suite(name: str, cfg: SuiteConfig) -> SuiteResult:
    if name == "completion-clean":
        return run_completion_suite(cfg)
    if name == "varmisuse-wip":
        return run_varmisuse_suite(cfg)
    if name == "finetune-init":
        return run_finetune_suite(cfg)
    if name == "edge-ablation":
        return run_ablation_suite(cfg)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITE_NAMES}")
