"""Autograd engine: every op's analytic gradient against finite differences."""

import numpy as np
import pytest

from graphwip.nn import tensor as T
from graphwip.nn.tensor import Tensor


def numeric_grad(fn, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar-valued fn at x."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = fn(x)
        flat[i] = orig - eps
        lo = fn(x)
        flat[i] = orig
        gf[i] = (hi - lo) / (2 * eps)
    return g


def check_grad(build, shape, seed=0, tol=1e-6):
    """build(Tensor) -> scalar Tensor; compares backward vs numeric grad."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape).astype(np.float64)
    t = Tensor(x.copy(), requires_grad=True)
    out = build(t)
    out.backward()
    num = numeric_grad(lambda a: float(build(Tensor(a)).data), x.copy())
    np.testing.assert_allclose(t.grad, num, rtol=tol, atol=tol)


@pytest.mark.parametrize("name,build", [
    ("add", lambda t: (t + 2.0).sum()),
    ("mul", lambda t: (t * t).sum()),
    ("sub", lambda t: (3.0 - t).sum()),
    ("div", lambda t: (t / 2.5).sum()),
    ("neg", lambda t: (-t).sum()),
    ("exp", lambda t: T.exp(t).sum()),
    ("tanh", lambda t: T.tanh(t).sum()),
    ("sigmoid", lambda t: T.sigmoid(t).sum()),
    ("relu", lambda t: T.relu(t * 1.7).sum()),
    ("sqrt", lambda t: T.sqrt(t * t + 1.0).sum()),
    ("pow", lambda t: T.pow_(t * t + 0.5, 1.5).sum()),
    ("mean", lambda t: t.mean()),
    ("mean_axis", lambda t: (t.mean(axis=1) * 2.0).sum()),
    ("sum_axis", lambda t: (t.sum(axis=0, keepdims=True) * 3.0).sum()),
    ("reshape", lambda t: (t.reshape(6, 2) * 0.5).sum()),
    ("transpose", lambda t: (t.transpose(1, 0) * t.transpose(1, 0)).sum()),
    ("getitem", lambda t: (t[1:, :2] * 2.0).sum()),
])
def test_op_gradients(name, build):
    check_grad(build, (3, 4))


def test_log_gradient():
    check_grad(lambda t: T.log(t * t + 0.3).sum(), (5,))


def test_matmul_gradients():
    rng = np.random.default_rng(1)
    b = rng.standard_normal((4, 3))
    check_grad(lambda t: (T.matmul(t, Tensor(b)) * 0.7).sum(), (2, 4))
    a = rng.standard_normal((2, 4))
    check_grad(lambda t: T.matmul(Tensor(a), t).sum(), (4, 3))


def test_matmul_batched_gradient():
    rng = np.random.default_rng(2)
    b = rng.standard_normal((5, 4, 3))
    check_grad(lambda t: T.matmul(t, Tensor(b)).sum(), (5, 2, 4))


def test_broadcast_add_gradient():
    rng = np.random.default_rng(3)
    big = Tensor(rng.standard_normal((4, 3)), requires_grad=True)
    small = Tensor(rng.standard_normal((3,)), requires_grad=True)
    (big + small).sum().backward()
    np.testing.assert_allclose(small.grad, np.full(3, 4.0))
    np.testing.assert_allclose(big.grad, np.ones((4, 3)))


def test_concat_gradient():
    rng = np.random.default_rng(4)
    a = Tensor(rng.standard_normal((2, 3)), requires_grad=True)
    b = Tensor(rng.standard_normal((4, 3)), requires_grad=True)
    out = T.concat([a, b], axis=0)
    (out * out).sum().backward()
    np.testing.assert_allclose(a.grad, 2 * a.data, rtol=1e-12)
    np.testing.assert_allclose(b.grad, 2 * b.data, rtol=1e-12)


def test_take_rows_gradient_accumulates_repeats():
    table = Tensor(np.arange(12, dtype=np.float64).reshape(4, 3),
                   requires_grad=True)
    idx = np.array([1, 1, 3])
    T.take_rows(table, idx).sum().backward()
    expect = np.zeros((4, 3))
    expect[1] = 2.0
    expect[3] = 1.0
    np.testing.assert_array_equal(table.grad, expect)


def test_masked_softmax_values_and_grad():
    x = np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])
    mask = np.array([[True, False, True], [False, False, False]])
    out = T.masked_softmax(Tensor(x), mask)
    # Masked entries get exactly zero; fully masked rows are all-zero.
    assert out.data[0, 1] == 0.0
    np.testing.assert_allclose(out.data[0, [0, 2]].sum(), 1.0, rtol=1e-12)
    np.testing.assert_array_equal(out.data[1], 0.0)

    def build(t):
        return (T.masked_softmax(t, mask) * Tensor(np.array([[1., 2., 3.],
                                                             [1., 1., 1.]]))).sum()
    check_grad(build, (2, 3), tol=1e-5)


def test_gradient_accumulates_across_uses():
    x = Tensor(np.array([2.0]), requires_grad=True)
    y = x * 3.0 + x * 4.0  # x used twice
    y.sum().backward()
    np.testing.assert_allclose(x.grad, [7.0])


def test_backward_requires_scalar():
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(RuntimeError):
        (x * 2.0).backward()


def test_backward_on_detached_raises():
    x = Tensor(np.ones(3))
    with pytest.raises(RuntimeError):
        x.sum().backward()


def test_no_grad_blocks_graph():
    x = Tensor(np.ones(3), requires_grad=True)
    with T.no_grad():
        y = (x * 2.0).sum()
    assert not y.requires_grad


def test_stop_gradient_cuts_flow():
    x = Tensor(np.array([1.5]), requires_grad=True)
    y = (T.stop_gradient(x * 2.0) * x).sum()
    y.backward()
    # d/dx of (const * x) where const = 2x evaluated, not differentiated.
    np.testing.assert_allclose(x.grad, [3.0])


def test_dropout_train_and_eval():
    x = Tensor(np.ones((100, 10)), requires_grad=True)
    rng = np.random.default_rng(0)
    out = T.dropout(x, 0.5, rng, training=True)
    kept = out.data != 0
    # Survivors are rescaled to preserve the mean.
    np.testing.assert_allclose(out.data[kept], 2.0)
    assert 0.3 < kept.mean() < 0.7
    same = T.dropout(x, 0.5, rng, training=False)
    assert same is x


def test_grad_dtype_follows_data():
    x = Tensor(np.ones(3, dtype=np.float32), requires_grad=True)
    (x * 2.0).sum().backward()
    assert x.grad.dtype == np.float32
