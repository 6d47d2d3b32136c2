"""Hot-loop kernels with numba-compiled and pure-numpy twins.

The numpy implementations are the reference; the numba versions must
match them bit-for-bit where the operation is exact (scatter/gather,
Adam) and to float rounding otherwise (focal loss, which fuses what
numpy does in several passes).  Selection: numba is used when importable
unless the GRAPHWIP_NO_NUMBA environment variable is set to a non-empty
value.  benchmarks/bench_kernels.py times both paths.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - environment dependent
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def use_numba() -> bool:
    return HAS_NUMBA and not os.environ.get("GRAPHWIP_NO_NUMBA")


def backend() -> str:
    return "numba" if use_numba() else "numpy"


# -- focal loss: fused sum + gradient over flat logits -----------------------

def _focal_np(logits, targets, valid, gamma, alpha):
    x = logits.astype(np.float64, copy=False)
    t = targets.astype(np.float64, copy=False)
    p = 1.0 / (1.0 + np.exp(-x))
    pt = np.where(targets, p, 1.0 - p)
    pt_c = np.clip(pt, 1e-12, 1.0)
    loss = -alpha * (1.0 - pt) ** gamma * np.log(pt_c)
    # d loss / d pt, with the log clamp zeroing its term below 1e-12.
    dpt = alpha * (gamma * (1.0 - pt) ** (gamma - 1.0) * np.log(pt_c)
                   if gamma != 0.0 else np.zeros_like(pt))
    dpt = dpt - alpha * np.where(pt > 1e-12, (1.0 - pt) ** gamma / pt_c, 0.0)
    dpt_dl = np.where(targets, p * (1.0 - p), -p * (1.0 - p))
    grad = dpt * dpt_dl
    loss = np.where(valid, loss, 0.0)
    grad = np.where(valid, grad, 0.0)
    del t
    return float(loss.sum()), grad.astype(logits.dtype, copy=False)


@njit(cache=True)
def _focal_nb(logits, targets, valid, gamma, alpha):  # pragma: no cover - jit
    n = logits.shape[0]
    grad = np.zeros(n, dtype=np.float64)
    total = 0.0
    for i in range(n):
        if not valid[i]:
            continue
        x = float(logits[i])
        p = 1.0 / (1.0 + np.exp(-x))
        if targets[i]:
            pt = p
            dpt_dl = p * (1.0 - p)
        else:
            pt = 1.0 - p
            dpt_dl = -p * (1.0 - p)
        pt_c = pt
        if pt_c < 1e-12:
            pt_c = 1e-12
        lg = np.log(pt_c)
        om = 1.0 - pt
        # pow() dominates this loop; γ=2 is the shipped default, so square
        # by multiplication on that path.
        if gamma == 2.0:
            omg = om * om
            omg1 = om
        elif gamma == 0.0:
            omg = 1.0
            omg1 = 0.0
        else:
            omg = om ** gamma
            omg1 = om ** (gamma - 1.0)
        total += -alpha * omg * lg
        if gamma != 0.0:
            dpt = alpha * gamma * omg1 * lg
        else:
            dpt = 0.0
        if pt > 1e-12:
            dpt -= alpha * omg / pt_c
        grad[i] = dpt * dpt_dl
    return total, grad


def focal_sum_grad(logits: np.ndarray, targets: np.ndarray, valid: np.ndarray,
                   gamma: float, alpha: float):
    """Σ focal loss and d/dlogits over flat arrays; invalid entries skipped."""
    logits = np.ascontiguousarray(logits.reshape(-1))
    targets = np.ascontiguousarray(targets.reshape(-1).astype(np.bool_))
    valid = np.ascontiguousarray(valid.reshape(-1).astype(np.bool_))
    if use_numba():
        total, grad = _focal_nb(logits.astype(np.float64), targets, valid,
                                float(gamma), float(alpha))
        return float(total), grad.astype(logits.dtype, copy=False)
    return _focal_np(logits, targets, valid, float(gamma), float(alpha))


# -- relative-position shift: gather (L,2L-1) -> (L,L) and its adjoint -------

def _relshift_gather_np(qp):
    L = qp.shape[0]
    rows = np.arange(L)[:, None]
    idx = np.arange(L)[:, None] - np.arange(L)[None, :] + (L - 1)
    return qp[rows, idx]


def _relshift_scatter_np(g):
    L = g.shape[0]
    out = np.zeros((L, 2 * L - 1), dtype=g.dtype)
    rows = np.arange(L)[:, None]
    idx = np.arange(L)[:, None] - np.arange(L)[None, :] + (L - 1)
    # Indices are unique within each row, so assignment is a safe scatter.
    out[rows, idx] = g
    return out


@njit(cache=True)
def _relshift_gather_nb(qp):  # pragma: no cover - jit
    L = qp.shape[0]
    out = np.empty((L, L), dtype=qp.dtype)
    for i in range(L):
        for j in range(L):
            out[i, j] = qp[i, i - j + L - 1]
    return out


@njit(cache=True)
def _relshift_scatter_nb(g):  # pragma: no cover - jit
    L = g.shape[0]
    out = np.zeros((L, 2 * L - 1), dtype=g.dtype)
    for i in range(L):
        for j in range(L):
            out[i, i - j + L - 1] = g[i, j]
    return out


def relshift_gather(qp: np.ndarray) -> np.ndarray:
    """out[i, j] = qp[i, i - j + L - 1]  (query i, key j, offset i-j)."""
    qp = np.ascontiguousarray(qp)
    return _relshift_gather_nb(qp) if use_numba() else _relshift_gather_np(qp)


def relshift_scatter(g: np.ndarray) -> np.ndarray:
    g = np.ascontiguousarray(g)
    return _relshift_scatter_nb(g) if use_numba() else _relshift_scatter_np(g)


# -- sparse edge bias: scatter typed per-pair increments into (L,L) ----------

def _edge_scatter_np(L, src, dst, vals, dtype):
    out = np.zeros((L, L), dtype=dtype)
    np.add.at(out, (src, dst), vals)
    return out


@njit(cache=True)
def _edge_scatter_nb(L, src, dst, vals, out):  # pragma: no cover - jit
    for k in range(src.shape[0]):
        out[src[k], dst[k]] += vals[k]
    return out


def edge_scatter(L: int, src: np.ndarray, dst: np.ndarray,
                 vals: np.ndarray) -> np.ndarray:
    """Accumulate per-edge values into a dense (L, L) bias matrix."""
    if use_numba():
        out = np.zeros((L, L), dtype=vals.dtype)
        return _edge_scatter_nb(L, src, dst, np.ascontiguousarray(vals), out)
    return _edge_scatter_np(L, src, dst, vals, vals.dtype)


def edge_gather(mat: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Adjoint of edge_scatter: read (src, dst) entries."""
    return mat[src, dst]


# -- Adam: fused in-place parameter update -----------------------------------

def _adam_np(param, grad, m, v, lr, b1, b2, eps, bc1, bc2):
    m *= b1
    m += (1.0 - b1) * grad
    v *= b2
    v += (1.0 - b2) * grad * grad
    mh = m / bc1
    vh = v / bc2
    param -= lr * mh / (np.sqrt(vh) + eps)


@njit(cache=True)
def _adam_nb(param, grad, m, v, lr, b1, b2, eps, bc1, bc2):  # pragma: no cover
    n = param.shape[0]
    for i in range(n):
        g = grad[i]
        m[i] = b1 * m[i] + (1.0 - b1) * g
        v[i] = b2 * v[i] + (1.0 - b2) * g * g
        mh = m[i] / bc1
        vh = v[i] / bc2
        param[i] -= lr * mh / (np.sqrt(vh) + eps)


def adam_update(param: np.ndarray, grad: np.ndarray, m: np.ndarray,
                v: np.ndarray, lr: float, b1: float, b2: float, eps: float,
                step: int) -> None:
    """One Adam update, in place, on flat float arrays."""
    bc1 = 1.0 - b1 ** step
    bc2 = 1.0 - b2 ** step
    if use_numba() and param.dtype == np.float32:
        _adam_nb(param, grad, m, v, np.float32(lr), np.float32(b1),
                 np.float32(b2), np.float32(eps), np.float32(bc1),
                 np.float32(bc2))
    else:
        _adam_np(param, grad, m, v, param.dtype.type(lr), param.dtype.type(b1),
                 param.dtype.type(b2), param.dtype.type(eps),
                 param.dtype.type(bc1), param.dtype.type(bc2))
