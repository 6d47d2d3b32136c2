"""Loss functions: focal loss oracles, cross-entropy, log-softmax."""

import numpy as np
import pytest

from graphwip.graphs.edges import EdgeSet, N_EDGE_TYPES
from graphwip.models.edge_model import edge_loss
from graphwip.nn.losses import (
    cross_entropy,
    cross_entropy_dist,
    focal_loss,
    log_softmax,
    nll_from_logprobs,
)
from graphwip.nn.tensor import Tensor


def _bce(logits, targets):
    p = 1.0 / (1.0 + np.exp(-logits))
    p = np.clip(np.where(targets, p, 1 - p), 1e-12, 1.0)
    return -np.log(p)


def test_gamma_zero_is_bce():
    rng = np.random.default_rng(0)
    logits = rng.normal(0, 4, size=10_000)
    targets = rng.random(10_000) < 0.5
    valid = np.ones_like(targets)
    out = focal_loss(Tensor(logits), targets.astype(float), valid, gamma=0.0)
    np.testing.assert_allclose(float(out.data), _bce(logits, targets).mean(),
                               rtol=1e-9)


def test_gamma_two_spot_value():
    # target=1 at p=0.9: (1-0.9)^2 * (-ln 0.9)
    logit = np.log(0.9 / 0.1)
    out = focal_loss(Tensor(np.array([logit])), np.array([1.0]),
                     np.array([True]), gamma=2.0)
    assert float(out.data) == pytest.approx(1.0536e-3, abs=1e-6)


def test_focal_downweights_easy_examples():
    easy = focal_loss(Tensor(np.array([4.0])), np.array([1.0]),
                      np.array([True]), gamma=2.0)
    easy_bce = focal_loss(Tensor(np.array([4.0])), np.array([1.0]),
                          np.array([True]), gamma=0.0)
    assert float(easy.data) < float(easy_bce.data) * 0.05


def test_focal_valid_mask_mean():
    logits = np.array([0.0, 100.0, -100.0, 0.0])
    targets = np.array([1.0, 0.0, 1.0, 0.0])
    valid = np.array([True, False, False, True])
    out = focal_loss(Tensor(logits), targets, valid, gamma=2.0)
    # Two valid entries, both at p_t = 0.5.
    expect = 0.25 * np.log(2.0)
    np.testing.assert_allclose(float(out.data), expect, rtol=1e-12)


def test_focal_requires_valid_entries():
    with pytest.raises(ValueError):
        focal_loss(Tensor(np.array([0.0])), np.array([1.0]),
                   np.array([False]), gamma=2.0)


def test_focal_gradient_finite_difference():
    rng = np.random.default_rng(1)
    logits = rng.normal(0, 2, size=30)
    targets = (rng.random(30) < 0.4).astype(float)
    valid = rng.random(30) < 0.85
    t = Tensor(logits.copy(), requires_grad=True)
    focal_loss(t, targets, valid, gamma=2.0).backward()
    eps = 1e-6
    for i in range(0, 30, 7):
        lp = logits.copy()
        lp[i] += eps
        hi = float(focal_loss(Tensor(lp), targets, valid, 2.0).data)
        lp[i] -= 2 * eps
        lo = float(focal_loss(Tensor(lp), targets, valid, 2.0).data)
        np.testing.assert_allclose(t.grad[i], (hi - lo) / (2 * eps),
                                   rtol=1e-4, atol=1e-9)


def test_edge_loss_two_token_toy():
    # Two tokens, one true edge, all logits zero: every ordered pair i!=j
    # for every type sits at p_t = 0.5, so the mean is 0.25*ln 2.
    L = 2
    truth = EdgeSet.from_iter(L, [(0, 1, 0)])
    logits = Tensor(np.zeros((L, L, N_EDGE_TYPES)))
    out = edge_loss(logits, truth, gamma=2.0)
    np.testing.assert_allclose(float(out.data), 0.25 * np.log(2.0),
                               rtol=1e-12)


def test_edge_loss_rejects_length_mismatch():
    truth = EdgeSet.from_iter(3, [(0, 1, 0)])
    with pytest.raises(ValueError):
        edge_loss(Tensor(np.zeros((2, 2, N_EDGE_TYPES))), truth)


def test_edge_loss_excludes_self_pairs():
    # A model scoring self-pairs arbitrarily badly must not change the loss.
    L = 3
    truth = EdgeSet.from_iter(L, [(0, 2, 1)])
    base = np.zeros((L, L, N_EDGE_TYPES))
    spiked = base.copy()
    for i in range(L):
        spiked[i, i, :] = 50.0
    a = edge_loss(Tensor(base), truth)
    b = edge_loss(Tensor(spiked), truth)
    np.testing.assert_allclose(float(a.data), float(b.data), rtol=1e-12)


def test_log_softmax_matches_oracle_and_is_stable():
    rng = np.random.default_rng(2)
    x = rng.normal(0, 1, size=(4, 7))
    lp = log_softmax(Tensor(x)).data
    ref = np.log(np.exp(x) / np.exp(x).sum(axis=-1, keepdims=True))
    np.testing.assert_allclose(lp, ref, rtol=1e-10)
    big = log_softmax(Tensor(np.array([[1000.0, 1000.0]]))).data
    np.testing.assert_allclose(big, np.log(0.5), rtol=1e-12)


def test_cross_entropy_matches_manual():
    rng = np.random.default_rng(3)
    logits = rng.normal(size=(5, 9))
    targets = rng.integers(0, 9, size=5)
    out = float(cross_entropy(Tensor(logits), targets).data)
    lp = logits - np.log(np.exp(logits).sum(axis=-1, keepdims=True))
    assert out == pytest.approx(-lp[np.arange(5), targets].mean(), rel=1e-10)


def test_cross_entropy_dist_one_hot_equals_hard():
    rng = np.random.default_rng(4)
    logits = rng.normal(size=7)
    onehot = np.zeros(7)
    onehot[3] = 1.0
    soft = float(cross_entropy_dist(Tensor(logits), onehot).data)
    hard = float(cross_entropy(Tensor(logits[None, :]), np.array([3])).data)
    assert soft == pytest.approx(hard, rel=1e-12)


def test_cross_entropy_dist_uniform_target():
    logits = Tensor(np.zeros(4))
    out = float(cross_entropy_dist(logits, np.full(4, 0.25)).data)
    assert out == pytest.approx(np.log(4.0), rel=1e-12)


def test_nll_from_logprobs_sums():
    vals = [Tensor(np.array(-0.5), requires_grad=True),
            Tensor(np.array(-1.5), requires_grad=True)]
    out = nll_from_logprobs(vals)
    assert float(out.data) == pytest.approx(2.0)
    out.backward()
    np.testing.assert_allclose(vals[0].grad, -1.0)
