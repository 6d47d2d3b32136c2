"""Loss functions: focal loss for edge prediction, cross-entropy for
decoding and classification heads."""

from __future__ import annotations

import numpy as np

from . import kernels
from . import tensor as T
from .tensor import Tensor, concat, exp, log, matmul


def focal_loss(logits: Tensor, targets: np.ndarray, valid: np.ndarray,
               gamma: float = 2.0, alpha: float = 1.0) -> Tensor:
    """Mean of -alpha*(1-p_t)^gamma * ln(p_t) over valid entries,
    p_t clamped to [1e-12, 1] before the log.  gamma=0, alpha=1 is BCE."""
    n_valid = int(np.count_nonzero(valid))
    if n_valid == 0:
        raise ValueError("focal loss needs at least one valid entry")
    total, grad = kernels.focal_sum_grad(
        logits.data, targets.astype(np.float64), valid, gamma, alpha)
    out = np.asarray(total / n_valid, dtype=np.float64)

    def da(g):
        return (g * grad.astype(np.float64) / n_valid).astype(logits.dtype)

    return T._unary(logits, out, da)


def log_softmax(logits: Tensor, axis: int = -1) -> Tensor:
    shift = Tensor(np.max(logits.data, axis=axis, keepdims=True))
    z = logits - shift
    lse = log(exp(z).sum(axis=axis, keepdims=True))
    return z - lse


def cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean NLL for integer targets; logits (N, V), targets (N,)."""
    targets = np.asarray(targets)
    lp = log_softmax(logits, axis=-1)
    picked = lp[np.arange(len(targets)), targets]
    return -picked.mean()


def cross_entropy_dist(logits: Tensor, target_probs: np.ndarray) -> Tensor:
    """NLL against a target distribution over one axis; logits (V,)."""
    lp = log_softmax(logits, axis=-1)
    q = Tensor(target_probs.astype(logits.dtype))
    return -(lp * q).sum()


def nll_from_logprobs(logprobs: list[Tensor]) -> Tensor:
    """Sum of negative picked log-probabilities (already gathered)."""
    return -concat([p.reshape(1) for p in logprobs]).sum()
