"""Precision/recall/F scoring of predicted edge sets against ground truth."""

from __future__ import annotations

from dataclasses import dataclass

from .edges import EdgeSet, EdgeType


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f_score: float
    support: int  # number of true edges
    predicted: int  # number of predicted edges


def _prf(n_pred: int, n_true: int, n_hit: int) -> PRF:
    p = n_hit / n_pred if n_pred else 0.0
    r = n_hit / n_true if n_true else 0.0
    f = 2 * p * r / (p + r) if (p + r) > 0 else 0.0
    return PRF(precision=p, recall=r, f_score=f, support=n_true, predicted=n_pred)


@dataclass(frozen=True)
class EdgeMetrics:
    per_type: dict[str, PRF]
    micro: PRF

    def as_dict(self) -> dict:
        def row(m: PRF) -> dict:
            return {"precision": m.precision, "recall": m.recall,
                    "f_score": m.f_score, "support": m.support,
                    "predicted": m.predicted}
        return {"per_type": {k: row(v) for k, v in self.per_type.items()},
                "micro": row(self.micro)}


def edge_metrics(pred: EdgeSet, truth: EdgeSet) -> EdgeMetrics:
    if pred.seq_len != truth.seq_len:
        raise ValueError(
            f"seq_len mismatch: pred {pred.seq_len} vs truth {truth.seq_len}")
    pset, tset = set(pred.edges), set(truth.edges)
    per_type: dict[str, PRF] = {}
    for t in EdgeType:
        pt = {e for e in pset if e[2] == int(t)}
        tt = {e for e in tset if e[2] == int(t)}
        per_type[t.name] = _prf(len(pt), len(tt), len(pt & tt))
    micro = _prf(len(pset), len(tset), len(pset & tset))
    return EdgeMetrics(per_type=per_type, micro=micro)


def pool_edge_metrics(pairs: list[tuple[EdgeSet, EdgeSet]]) -> EdgeMetrics:
    """Corpus-level metrics: counts pooled over (pred, truth) pairs."""
    hit = {int(t): 0 for t in EdgeType}
    np_ = {int(t): 0 for t in EdgeType}
    nt = {int(t): 0 for t in EdgeType}
    for pred, truth in pairs:
        if pred.seq_len != truth.seq_len:
            raise ValueError("seq_len mismatch in pooled metrics")
        pset, tset = set(pred.edges), set(truth.edges)
        for e in pset:
            np_[e[2]] += 1
        for e in tset:
            nt[e[2]] += 1
        for e in pset & tset:
            hit[e[2]] += 1
    per_type = {EdgeType(t).name: _prf(np_[t], nt[t], hit[t]) for t in np_}
    micro = _prf(sum(np_.values()), sum(nt.values()), sum(hit.values()))
    return EdgeMetrics(per_type=per_type, micro=micro)
