import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from raidnav.rbfn import RbfNetwork, activate, init_stochastic


def test_activation_at_center_and_width():
    net = RbfNetwork.uniform([0.2, -0.4], 0.13)
    assert activate(net, 0.2).phi[0] == 1.0
    assert activate(net, -0.4 + 0.13).phi[1] == pytest.approx(math.exp(-1), abs=1e-15)


def test_unit_activations_norm():
    net = RbfNetwork.uniform([0.3] * 9, 0.13)
    out = activate(net, 0.3)
    assert out.norm == pytest.approx(3.0) and out.norm_sq == pytest.approx(9.0)


def test_stochastic_init_is_deterministic():
    a = init_stochastic(9, seed=42)
    b = init_stochastic(9, seed=42)
    assert a == b
    assert a.n == 9 and set(a.widths) == {0.13}


@given(st.integers(0, 2**32 - 1), st.integers(1, 50))
def test_centers_in_range(seed, n):
    net = init_stochastic(n, seed=seed)
    assert all(-1.0 <= c <= 1.0 for c in net.centers)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_translation_covariance(v, shift):
    net = init_stochastic(9, seed=3)
    moved = RbfNetwork(tuple(c + shift for c in net.centers), net.widths)
    np.testing.assert_allclose(activate(moved, v + shift).phi, activate(net, v).phi, rtol=1e-9, atol=1e-300)


@given(st.floats(-50, 50))
def test_outputs_bounded(v):
    out = activate(init_stochastic(9, seed=1), v)
    assert all(0.0 <= p <= 1.0 for p in out.phi)
    assert 0.0 <= out.norm <= 3.0


def test_invalid_networks():
    with pytest.raises(ValueError):
        RbfNetwork((), ())
    with pytest.raises(ValueError):
        RbfNetwork((0.0, 1.0), (0.1, 0.0))
    with pytest.raises(ValueError):
        init_stochastic(0)
