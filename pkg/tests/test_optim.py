"""Adam and gradient clipping against hand-rolled references."""

import numpy as np
import pytest

from graphwip.nn.optim import Adam, clip_global_norm, global_grad_norm
from graphwip.nn.tensor import Tensor


def _reference_adam(p, g_seq, lr=1e-4, b1=0.9, b2=0.999, eps=1e-8):
    p = p.copy()
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    for t, g in enumerate(g_seq, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1 ** t)
        vh = v / (1 - b2 ** t)
        p = p - lr * mh / (np.sqrt(vh) + eps)
    return p


def test_adam_matches_reference_over_steps():
    rng = np.random.default_rng(0)
    p0 = rng.standard_normal(12)
    grads = [rng.standard_normal(12) for _ in range(7)]
    t = Tensor(p0.copy(), requires_grad=True)
    opt = Adam({"w": t}, lr=1e-4)
    for g in grads:
        t.grad = g.copy()
        opt.step()
        opt.zero_grad()
    np.testing.assert_allclose(t.data, _reference_adam(p0, grads),
                               rtol=1e-12, atol=1e-14)


def test_adam_skips_missing_grads():
    t = Tensor(np.ones(3), requires_grad=True)
    opt = Adam({"w": t})
    opt.step()  # no grad set
    np.testing.assert_array_equal(t.data, np.ones(3))


def test_adam_shared_tensor_updates_once():
    rng = np.random.default_rng(1)
    p0 = rng.standard_normal(5)
    g = rng.standard_normal(5)

    shared = Tensor(p0.copy(), requires_grad=True)
    opt = Adam({"a.u": shared, "b.u": shared}, lr=1e-3)
    shared.grad = g.copy()
    opt.step()

    single = Tensor(p0.copy(), requires_grad=True)
    opt2 = Adam({"u": single}, lr=1e-3)
    single.grad = g.copy()
    opt2.step()

    np.testing.assert_array_equal(shared.data, single.data)


def test_adam_add_params():
    a = Tensor(np.zeros(2), requires_grad=True)
    b = Tensor(np.zeros(2), requires_grad=True)
    opt = Adam({"a": a})
    opt.add_params({"a": a, "b": b})
    assert len(opt.params) == 2
    b.grad = np.ones(2)
    opt.step()
    assert not np.allclose(b.data, 0.0)


def test_clip_scales_to_exact_norm():
    t = Tensor(np.zeros(4), requires_grad=True)
    t.grad = np.array([6.0, 8.0, 0.0, 0.0])  # norm 10
    pre = clip_global_norm({"w": t}, 0.25)
    assert pre == pytest.approx(10.0, rel=1e-15)
    np.testing.assert_allclose(global_grad_norm({"w": t}), 0.25, rtol=1e-12)
    np.testing.assert_allclose(t.grad, [0.15, 0.2, 0.0, 0.0], rtol=1e-12)


def test_clip_noop_below_threshold():
    t = Tensor(np.zeros(2), requires_grad=True)
    t.grad = np.array([0.1, 0.0])
    pre = clip_global_norm({"w": t}, 0.25)
    assert pre == pytest.approx(0.1)
    np.testing.assert_array_equal(t.grad, [0.1, 0.0])


def test_clip_global_across_tensors():
    a = Tensor(np.zeros(1), requires_grad=True)
    b = Tensor(np.zeros(1), requires_grad=True)
    a.grad = np.array([3.0])
    b.grad = np.array([4.0])  # joint norm 5
    clip_global_norm({"a": a, "b": b}, 1.0)
    joint = np.sqrt(a.grad[0] ** 2 + b.grad[0] ** 2)
    assert joint == pytest.approx(1.0, rel=1e-12)
    # Direction preserved.
    assert a.grad[0] / b.grad[0] == pytest.approx(0.75, rel=1e-12)


def test_clip_counts_shared_tensor_once():
    t = Tensor(np.zeros(1), requires_grad=True)
    t.grad = np.array([3.0])
    assert global_grad_norm({"a": t, "b": t}) == pytest.approx(3.0)


def test_zero_grad():
    t = Tensor(np.zeros(2), requires_grad=True)
    t.grad = np.ones(2)
    Adam({"w": t}).zero_grad()
    assert t.grad is None


def test_float32_params_stay_float32():
    t = Tensor(np.zeros(3, dtype=np.float32), requires_grad=True)
    opt = Adam({"w": t}, lr=1e-2)
    t.grad = np.ones(3, dtype=np.float32)
    opt.step()
    assert t.data.dtype == np.float32
