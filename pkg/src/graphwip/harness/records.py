"""Append-only metrics records (JSONL) and seed-aggregation helpers."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field


@dataclass
class MetricsRecord:
    step: int
    split: str
    task: str
    mode: str
    seed: int
    metrics: dict = field(default_factory=dict)
    wall_time: float = 0.0
    tau: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "MetricsRecord":
        return MetricsRecord(**json.loads(line))


def append_records(path: str, records: list[MetricsRecord]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str) -> list[MetricsRecord]:
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as fh:
        return [MetricsRecord.from_json(line) for line in fh if line.strip()]


def seed_mean_std(records: list[MetricsRecord], metric: str
                  ) -> tuple[float, float]:
    """Mean and (population) stdev of one metric across records."""
    import numpy as np

    vals = np.array([r.metrics[metric] for r in records], dtype=np.float64)
    if len(vals) == 0:
        raise ValueError(f"no records carry metric {metric!r}")
    return float(vals.mean()), float(vals.std())
