"""Adam with fixed learning rate and global-norm gradient clipping."""

from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import Tensor


def _dedup(params: dict[str, Tensor]) -> list[Tensor]:
    # Shared tensors (u, v appear under several module paths) update once.
    seen: dict[int, Tensor] = {}
    for p in params.values():
        seen.setdefault(id(p), p)
    return list(seen.values())


def global_grad_norm(params: dict[str, Tensor] | list[Tensor]) -> float:
    ps = _dedup(params) if isinstance(params, dict) else params
    total = 0.0
    for p in ps:
        if p.grad is not None:
            g = p.grad.astype(np.float64, copy=False)
            total += float(np.dot(g.ravel(), g.ravel()))
    return float(np.sqrt(total))


def clip_global_norm(params: dict[str, Tensor] | list[Tensor],
                     max_norm: float) -> float:
    """Scale all gradients so their joint 2-norm is at most max_norm.
    Returns the pre-clip norm."""
    ps = _dedup(params) if isinstance(params, dict) else params
    norm = global_grad_norm(ps)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in ps:
            if p.grad is not None:
                p.grad *= p.grad.dtype.type(scale)
    return norm


class Adam:
    def __init__(self, params: dict[str, Tensor], lr: float = 1e-4,
                 betas: tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8):
        self.params = _dedup(params)
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.step_count = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def add_params(self, params: dict[str, Tensor]) -> None:
        have = {id(p) for p in self.params}
        for p in _dedup(params):
            if id(p) not in have:
                self.params.append(p)
                self._m.append(np.zeros_like(p.data))
                self._v.append(np.zeros_like(p.data))
                have.add(id(p))

    def step(self) -> None:
        self.step_count += 1
        for p, m, v in zip(self.params, self._m, self._v):
            if p.grad is None:
                continue
            grad = p.grad.astype(p.data.dtype, copy=False)
            kernels.adam_update(p.data.ravel(), grad.ravel(), m.ravel(),
                                v.ravel(), self.lr, self.b1, self.b2,
                                self.eps, self.step_count)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
