"""Minimal reverse-mode autodiff over numpy arrays.

A Tensor wraps an ndarray and a backward closure; backward() runs the
tape in reverse topological order.  Ops preserve dtype, so the same
model code runs in float32 for training and float64 for
finite-difference gradient checks.  Softmax takes an explicit boolean
mask and writes exact zeros at masked positions, which is what makes
the causal no-leakage property bit-exact rather than approximate.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable

import numpy as np

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False,
                 parents: tuple = (), backward: Callable | None = None):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad and _grad_enabled
        self._parents = parents if self.requires_grad else ()
        self._backward = backward if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def accumulate(self, g: np.ndarray) -> None:
        # Most tensors receive exactly one gradient, so assign a copy on
        # first touch instead of paying for a zero fill plus an add.
        if self.grad is None:
            self.grad = np.array(np.broadcast_to(g, self.data.shape),
                                 dtype=self.data.dtype)
        else:
            self.grad += g

    def backward(self, grad: np.ndarray | None = None) -> None:
        if not self.requires_grad:
            raise RuntimeError("backward on a non-differentiable tensor")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        if grad is None:
            if self.data.size != 1:
                raise RuntimeError("backward() without grad needs a scalar")
            grad = np.ones_like(self.data)
        self.accumulate(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return add(self, mul(other, -1.0))
        return add(self, -other)

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, pow_(other, -1.0))
        return mul(self, 1.0 / other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)

    def reshape(self, *shape):
        return reshape(self, shape)

    def transpose(self, *axes):
        return transpose(self, axes or None)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    arr = np.asarray(x, dtype=dtype)
    return Tensor(arr)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _binary(a, b, out_data, da: Callable, db: Callable) -> Tensor:
    req = (isinstance(a, Tensor) and a.requires_grad) or \
          (isinstance(b, Tensor) and b.requires_grad)
    if not (req and _grad_enabled):
        return Tensor(out_data)
    parents = tuple(t for t in (a, b) if isinstance(t, Tensor) and t.requires_grad)
    out = Tensor(out_data, requires_grad=True, parents=parents)

    def backward(g):
        if isinstance(a, Tensor) and a.requires_grad:
            a.accumulate(_unbroadcast(da(g), a.data.shape))
        if isinstance(b, Tensor) and b.requires_grad:
            b.accumulate(_unbroadcast(db(g), b.data.shape))

    out._backward = backward
    return out


def _unary(a: Tensor, out_data, da: Callable) -> Tensor:
    if not (a.requires_grad and _grad_enabled):
        return Tensor(out_data)
    out = Tensor(out_data, requires_grad=True, parents=(a,))
    out._backward = lambda g: a.accumulate(_unbroadcast(da(g), a.data.shape))
    return out


def add(a, b) -> Tensor:
    # Non-Tensor operands stay as native scalars so numpy's weak scalar
    # promotion preserves float32 under numpy 2.x.
    av = a.data if isinstance(a, Tensor) else a
    bv = b.data if isinstance(b, Tensor) else b
    return _binary(a, b, av + bv, lambda g: g, lambda g: g)


def mul(a, b) -> Tensor:
    av = a.data if isinstance(a, Tensor) else a
    bv = b.data if isinstance(b, Tensor) else b
    return _binary(a, b, av * bv, lambda g: g * bv, lambda g: g * av)


def pow_(a: Tensor, p: float) -> Tensor:
    out = a.data ** p
    return _unary(a, out, lambda g: g * p * a.data ** (p - 1.0))


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return _unary(a, out, lambda g: g * 0.5 / out)


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _unary(a, out, lambda g: g * out)


def log(a: Tensor) -> Tensor:
    return _unary(a, np.log(a.data), lambda g: g / a.data)


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _unary(a, out, lambda g: g * (1.0 - out * out))


def sigmoid(a: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-a.data))
    return _unary(a, out, lambda g: g * out * (1.0 - out))


def relu(a: Tensor) -> Tensor:
    out = np.maximum(a.data, 0.0)
    return _unary(a, out, lambda g: g * (a.data > 0))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data @ b.data

    def da(g):
        return g @ np.swapaxes(b.data, -1, -2)

    def db(g):
        return np.swapaxes(a.data, -1, -2) @ g

    return _binary(a, b, out, da, db)


def sum_(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def da(g):
        if axis is None:
            return np.broadcast_to(g, a.data.shape).copy()
        g2 = g if keepdims else np.expand_dims(g, axis)
        return np.broadcast_to(g2, a.data.shape).copy()

    return _unary(a, out, da)


def mean(a: Tensor, axis=None, keepdims=False) -> Tensor:
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(sum_(a, axis, keepdims), 1.0 / n)


def reshape(a: Tensor, shape) -> Tensor:
    return _unary(a, a.data.reshape(shape),
                  lambda g: g.reshape(a.data.shape))


def transpose(a: Tensor, axes=None) -> Tensor:
    out = np.transpose(a.data, axes)
    inv = None if axes is None else np.argsort(axes)
    return _unary(a, out, lambda g: np.transpose(g, inv))


def getitem(a: Tensor, idx) -> Tensor:
    out = a.data[idx]

    def da(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return full

    return _unary(a, out, da)


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = list(tensors)
    out = np.concatenate([t.data for t in ts], axis=axis)
    req = any(t.requires_grad for t in ts)
    if not (req and _grad_enabled):
        return Tensor(out)
    res = Tensor(out, requires_grad=True,
                 parents=tuple(t for t in ts if t.requires_grad))
    sizes = [t.data.shape[axis] for t in ts]

    def backward(g):
        start = 0
        for t, s in zip(ts, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(start, start + s)
            if t.requires_grad:
                t.accumulate(g[tuple(sl)])
            start += s

    res._backward = backward
    return res


def take_rows(table: Tensor, idx: np.ndarray) -> Tensor:
    """table[idx] for a 2-D table and integer index array (embedding)."""
    idx = np.asarray(idx)
    out = table.data[idx]

    def da(g):
        full = np.zeros_like(table.data)
        np.add.at(full, idx.reshape(-1),
                  g.reshape(-1, table.data.shape[1]))
        return full

    return _unary(table, out, da)


def masked_softmax(a: Tensor, mask: np.ndarray, axis: int = -1) -> Tensor:
    """Softmax over `axis` restricted to mask==True; masked entries get
    probability exactly 0.  Rows with no valid entries come out all-zero."""
    x = a.data
    neg = np.where(mask, x, -np.inf)
    mx = neg.max(axis=axis, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    ex = np.where(mask, np.exp(neg - mx), 0.0)
    denom = ex.sum(axis=axis, keepdims=True)
    safe = np.where(denom > 0, denom, 1.0)
    out = ex / safe

    def da(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return out * (g - dot)

    return _unary(a, out, da)


def dropout(a: Tensor, rate: float, rng: np.random.Generator,
            training: bool) -> Tensor:
    if not training or rate <= 0.0:
        return a
    keep = (rng.random(a.data.shape) >= rate).astype(a.data.dtype)
    scale = 1.0 / (1.0 - rate)
    return mul(a, keep * scale)


def stop_gradient(a: Tensor) -> Tensor:
    return Tensor(a.data)
