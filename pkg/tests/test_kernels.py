"""Numba kernels against their pure-numpy twins and scalar oracles."""

import numpy as np
import pytest

from graphwip.nn import kernels as K

pytestmark = pytest.mark.skipif(
    not K.HAS_NUMBA, reason="numba unavailable; only one backend to compare")


def _focal_oracle(logits, targets, valid, gamma, alpha):
    """Literal per-element focal loss, no vectorization."""
    total = 0.0
    grad = np.zeros_like(logits, dtype=np.float64)
    for i in range(logits.size):
        if not valid.flat[i]:
            continue
        x = float(logits.flat[i])
        p = 1.0 / (1.0 + np.exp(-x))
        pt = p if targets.flat[i] else 1.0 - p
        ptc = max(pt, 1e-12)
        total += -alpha * (1.0 - pt) ** gamma * np.log(ptc)
        # numeric gradient per element
        eps = 1e-7
        for sign in (+1, -1):
            pe = 1.0 / (1.0 + np.exp(-(x + sign * eps)))
            pte = pe if targets.flat[i] else 1.0 - pe
            le = -alpha * (1.0 - pte) ** gamma * np.log(max(pte, 1e-12))
            grad.flat[i] += sign * le / (2 * eps)
    return total, grad


@pytest.mark.parametrize("gamma", [0.0, 1.0, 2.0, 3.5])
def test_focal_backends_agree(gamma):
    rng = np.random.default_rng(0)
    logits = rng.normal(0, 3, size=400).astype(np.float64)
    targets = rng.random(400) < 0.3
    valid = rng.random(400) < 0.9
    tn, gn = K._focal_np(logits, targets, valid, gamma, 1.0)
    tb, gb = K._focal_nb(logits, targets, valid, gamma, 1.0)
    np.testing.assert_allclose(tb, tn, rtol=1e-12)
    np.testing.assert_allclose(gb, gn, rtol=1e-10, atol=1e-12)


def test_focal_matches_scalar_oracle():
    rng = np.random.default_rng(1)
    logits = rng.normal(0, 2, size=64)
    targets = rng.random(64) < 0.5
    valid = np.ones(64, dtype=bool)
    t_o, g_o = _focal_oracle(logits, targets, valid, 2.0, 1.0)
    t_k, g_k = K.focal_sum_grad(logits, targets, valid, 2.0, 1.0)
    np.testing.assert_allclose(t_k, t_o, rtol=1e-10)
    np.testing.assert_allclose(g_k, g_o, rtol=1e-5, atol=1e-7)


def test_focal_invalid_entries_skipped():
    logits = np.array([5.0, -5.0, 0.0])
    targets = np.array([True, False, True])
    valid = np.array([False, False, False])
    total, grad = K.focal_sum_grad(logits, targets, valid, 2.0, 1.0)
    assert total == 0.0
    np.testing.assert_array_equal(grad, 0.0)


def test_relshift_backends_agree():
    rng = np.random.default_rng(2)
    for L in (1, 2, 7, 32):
        qp = rng.standard_normal((L, 2 * L - 1))
        np.testing.assert_array_equal(K._relshift_gather_nb(qp),
                                      K._relshift_gather_np(qp))
        g = rng.standard_normal((L, L))
        np.testing.assert_array_equal(K._relshift_scatter_nb(g),
                                      K._relshift_scatter_np(g))


def test_relshift_gather_offset_semantics():
    # Row i, column j reads the entry for relative offset i - j.
    L = 4
    qp = np.tile(np.arange(2 * L - 1, dtype=float), (L, 1))
    out = K.relshift_gather(qp)
    for i in range(L):
        for j in range(L):
            assert out[i, j] == (i - j) + (L - 1)


def test_relshift_scatter_is_adjoint_of_gather():
    rng = np.random.default_rng(3)
    L = 9
    qp = rng.standard_normal((L, 2 * L - 1))
    g = rng.standard_normal((L, L))
    lhs = float((K.relshift_gather(qp) * g).sum())
    rhs = float((qp * K.relshift_scatter(g)).sum())
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_edge_scatter_backends_and_duplicates():
    src = np.array([0, 2, 0, 0])
    dst = np.array([1, 2, 1, 3])
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    out = K.edge_scatter(4, src, dst, vals)
    ref = K._edge_scatter_np(4, src, dst, vals, vals.dtype)
    np.testing.assert_array_equal(out, ref)
    assert out[0, 1] == 4.0  # duplicate pair accumulates
    assert out[2, 2] == 2.0 and out[0, 3] == 4.0


def test_edge_gather_is_adjoint_of_scatter():
    rng = np.random.default_rng(4)
    L = 6
    src = rng.integers(0, L, size=10)
    dst = rng.integers(0, L, size=10)
    vals = rng.standard_normal(10)
    mat = rng.standard_normal((L, L))
    lhs = float((K.edge_scatter(L, src, dst, vals) * mat).sum())
    rhs = float((vals * K.edge_gather(mat, src, dst)).sum())
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_adam_backends_bit_identical():
    rng = np.random.default_rng(5)
    shapes = [(7,), (3, 5)]
    for shape in shapes:
        p0 = rng.standard_normal(shape)
        g = rng.standard_normal(shape)
        m0 = rng.standard_normal(shape) * 0.1
        v0 = np.abs(rng.standard_normal(shape)) * 0.1
        args = (1e-3, 0.9, 0.999, 1e-8, 0.9, 0.999)
        pa, ma, va = p0.copy(), m0.copy(), v0.copy()
        pb, mb, vb = p0.copy(), m0.copy(), v0.copy()
        K._adam_np(pa, g, ma, va, *args)
        K._adam_nb(pb, g, mb, vb, *args)
        np.testing.assert_array_equal(pa, pb)
        np.testing.assert_array_equal(ma, mb)
        np.testing.assert_array_equal(va, vb)


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv("GRAPHWIP_NO_NUMBA", "1")
    assert K.backend() == "numpy"
    monkeypatch.delenv("GRAPHWIP_NO_NUMBA")
    assert K.backend() == ("numba" if K.HAS_NUMBA else "numpy")
