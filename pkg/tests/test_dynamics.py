import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix.dynamics import branch_inverse, orbit, preimage_tree, preimages
from skewmix.errors import CapExceeded
from skewmix.mapspec import example

TRIPLE = example("tripling_cos")
PERTURBED = example("perturbed_tripling")


def test_tripling_preimages_of_half():
    xs = sorted(nd.x for nd in preimages(TRIPLE, 0.5, 1))
    np.testing.assert_allclose(xs, [1 / 6, 1 / 2, 5 / 6], atol=1e-14)
    for nd in preimages(TRIPLE, 0.5, 1):
        assert nd.J_n == pytest.approx(1 / 3)
        assert nd.dtau_n == pytest.approx(-2 * math.pi * math.sin(2 * math.pi * nd.x))


def test_branch_inverse_nonlinear():
    x = branch_inverse(PERTURBED, 0, 0.25)
    assert abs(float(PERTURBED.f(np.array([x]))[0]) - 0.25) <= 1e-13


@pytest.mark.parametrize("sp", [TRIPLE, PERTURBED], ids=["tripling", "perturbed"])
@given(y=st.floats(0.0, 0.999), n=st.integers(1, 6))
def test_tree_nodes_return_to_root(sp, y, n):
    t = preimage_tree(sp, [y], n)
    assert len(t) == 3**n
    x = t.x
    for _ in range(n):
        x = sp.f(x)
    d = np.abs(np.mod(x - y + 0.5, 1.0) - 0.5)
    assert d.max() < 1e-9


@given(y=st.floats(0.0, 0.999), n=st.integers(1, 7))
def test_jacobians_sum_to_one_for_linear_map(y, n):
    t = preimage_tree(TRIPLE, [y], n)
    assert t.J.sum() == pytest.approx(1.0, abs=1e-12)


@given(y=st.floats(0.0, 0.999), n=st.integers(1, 6))
def test_birkhoff_sum_matches_forward_orbit(y, n):
    t = preimage_tree(PERTURBED, [y], n)
    k = int(np.argmax(t.J))
    pts = orbit(PERTURBED, float(t.x[k]), 0.0, n)
    tau_sum = pts[-1][1] - pts[0][1]
    assert np.mod(tau_sum - t.tau[k] + 0.5, 1.0) - 0.5 == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("sp", [TRIPLE, PERTURBED], ids=["tripling", "perturbed"])
def test_cocycle_slope_bound_every_node(sp):
    t = preimage_tree(sp, np.linspace(0.01, 0.99, 5), 8, check_bound=False)
    assert np.max(np.abs(t.J * t.dtau)) <= 0.5 * sp.C1 * (1 + 1e-9)


def test_depth_cap():
    with pytest.raises(CapExceeded):
        preimage_tree(TRIPLE, [0.5], 15)


def test_nodes_sorted_by_root_then_word():
    t = preimage_tree(TRIPLE, [0.2, 0.7], 2)
    assert list(t.owner) == sorted(t.owner)
    words = [tuple(w) for w in t.words[t.slice(0)]]
    assert words == sorted(words)
