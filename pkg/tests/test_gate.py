"""Straight-through gate: hard forward, tempered-sigmoid backward."""

import numpy as np
import pytest

from graphwip.nn.gate import GateConfig, st_gate, st_gate_backward_factor
from graphwip.nn.tensor import Tensor


def test_forward_is_hard_threshold():
    logits = Tensor(np.array([-3.0, -1e-9, 0.0, 1e-9, 5.0]))
    out = st_gate(logits, GateConfig(tau=0.1))
    np.testing.assert_array_equal(out.data, [0.0, 0.0, 1.0, 1.0, 1.0])


def test_forward_independent_of_tau():
    logits = Tensor(np.linspace(-2, 2, 9))
    outs = [st_gate(logits, GateConfig(tau=t)).data for t in (0.01, 0.1, 1.0)]
    np.testing.assert_array_equal(outs[0], outs[1])
    np.testing.assert_array_equal(outs[1], outs[2])


def test_backward_factor_at_zero():
    assert st_gate_backward_factor(0.0, 1.0) == pytest.approx(0.25, abs=1e-15)


def test_backward_factor_spot_value():
    # sigma(-4)(1 - sigma(-4)) / 0.5
    assert st_gate_backward_factor(-2.0, 0.5) == pytest.approx(0.035325,
                                                               abs=5e-7)


@pytest.mark.parametrize("tau", [0.01, 0.1, 1.0])
def test_backward_matches_closed_form(tau):
    rng = np.random.default_rng(0)
    logits = rng.normal(0, 2, size=200)
    t = Tensor(logits.copy(), requires_grad=True)
    st_gate(t, GateConfig(tau=tau)).sum().backward()
    s = 1.0 / (1.0 + np.exp(-logits / tau))
    np.testing.assert_allclose(t.grad, s * (1.0 - s) / tau,
                               rtol=1e-12, atol=1e-12)


def test_backward_scales_incoming_gradient():
    t = Tensor(np.array([0.3, -0.7]), requires_grad=True)
    out = st_gate(t, GateConfig(tau=0.5))
    (out * Tensor(np.array([2.0, -3.0]))).sum().backward()
    expect = np.array([2.0 * st_gate_backward_factor(0.3, 0.5),
                       -3.0 * st_gate_backward_factor(-0.7, 0.5)])
    np.testing.assert_allclose(t.grad, expect, rtol=1e-12)


def test_gate_is_deterministic():
    rng = np.random.default_rng(1)
    logits = Tensor(rng.normal(size=50))
    a = st_gate(logits, GateConfig(tau=0.1)).data
    b = st_gate(logits, GateConfig(tau=0.1)).data
    np.testing.assert_array_equal(a, b)


def test_gate_config_range():
    with pytest.raises(ValueError):
        GateConfig(tau=0.001)
    with pytest.raises(ValueError):
        GateConfig(tau=1.5)
    GateConfig(tau=0.01)
    GateConfig(tau=1.0)


def test_small_tau_concentrates_gradient():
    # As tau shrinks the backward factor spikes near 0 and vanishes away
    # from it.
    assert st_gate_backward_factor(0.0, 0.01) > st_gate_backward_factor(0.0, 1.0)
    assert st_gate_backward_factor(2.0, 0.01) < st_gate_backward_factor(2.0, 1.0)
