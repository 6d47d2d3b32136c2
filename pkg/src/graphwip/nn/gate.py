"""Straight-through edge gate.

Forward is the hard threshold 1[l >= 0]; backward multiplies the incoming
gradient by the tempered-sigmoid derivative sigma(l/tau)(1-sigma(l/tau))/tau.
No noise is sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import Tensor


@dataclass(frozen=True)
class GateConfig:
    tau: float = 0.1

    def __post_init__(self):
        if not (0.01 <= self.tau <= 1.0):
            raise ValueError("tau must lie in [0.01, 1]")


def st_gate(logits: Tensor, cfg: GateConfig) -> Tensor:
    if cfg.tau <= 0.0:
        raise ValueError("tau must be positive")
    hard = (logits.data >= 0.0).astype(logits.dtype)

    def da(g):
        s = 1.0 / (1.0 + np.exp(-logits.data.astype(np.float64) / cfg.tau))
        return (g * (s * (1.0 - s) / cfg.tau)).astype(logits.dtype)

    return T._unary(logits, hard, da)


def st_gate_backward_factor(logit: float, tau: float) -> float:
    """Closed-form backward multiplier, for verification."""
    s = 1.0 / (1.0 + np.exp(-logit / tau))
    return float(s * (1.0 - s) / tau)
