import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix import cones
from skewmix.dynamics import preimage_tree
from skewmix.errors import NonPositiveDensity
from skewmix.grid import GridFunction
from skewmix.mapspec import example

GENERIC = example("tripling_cos")
COBOUNDARY = example("tripling_coboundary")


def test_transversal_is_disjointness():
    a = cones.ConeInterval(0.0, 1.0)
    assert not cones.transversal(a, cones.ConeInterval(2.0, 1.0))
    assert cones.transversal(a, cones.ConeInterval(2.0, 0.999))


@given(st.floats(-5, 5), st.floats(0, 3), st.floats(-5, 5), st.floats(0, 3))
def test_transversal_is_symmetric(c1, w1, c2, w2):
    a, b = cones.ConeInterval(c1, w1), cones.ConeInterval(c2, w2)
    assert cones.transversal(a, b) == cones.transversal(b, a)


def test_generic_phi_values():
    assert cones.phi(GENERIC, 1) == pytest.approx(1.0)
    assert cones.phi(GENERIC, 2) == pytest.approx(2 / 3)
    assert cones.phi(GENERIC, 3) == pytest.approx(4 / 9)


@pytest.mark.parametrize("n", range(1, 7))
def test_coboundary_never_separates(n):
    assert cones.phi(COBOUNDARY, n) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("name", ["tripling_cos", "perturbed_tripling"])
@pytest.mark.parametrize("n", [2, 4, 5])
def test_sweep_matches_quadratic_oracle(name, n):
    sp = example(name)
    t = preimage_tree(sp, [0.3], n)
    assert cones.phi_at(sp, n, [0.3])[0] == pytest.approx(cones.phi_brute(t, sp.C1), abs=1e-14)


def test_phi_is_nonincreasing_for_generic():
    v = [cones.phi(GENERIC, n) for n in range(1, 7)]
    assert all(b <= a + 1e-12 for a, b in zip(v, v[1:]))


@pytest.mark.parametrize("name", ["tripling_cos", "perturbed_tripling"])
def test_transversal_pairs_are_separated(name):
    sp = example(name)
    t = preimage_tree(sp, [0.1, 0.6], 6)
    assert cones.separation_violations(t, sp.C1) == 0


def test_phi_tilde_submultiplicative():
    ys = cones.sample_points(GENERIC, 16)
    assert cones.phi_tilde_sup(GENERIC, 4, ys) <= cones.phi_tilde_sup(GENERIC, 2, ys) ** 2 + 1e-12


def test_phi_tilde_sup_dominates_samples():
    ys = [0.37]
    t = preimage_tree(GENERIC, ys, 4)
    lo, hi = cones.cone_bounds(t, GENERIC.C1)
    sup = cones.phi_tilde_sup(GENERIC, 4, ys)
    for L in np.linspace(lo.min(), hi.max(), 200):
        assert cones.phi_tilde(GENERIC, 4, L, 0.37) <= sup + 1e-12


def test_phi_tilde_rejects_nonpositive_density():
    with pytest.raises(NonPositiveDensity):
        cones.phi_tilde(GENERIC, 2, 0.0, 0.5, GridFunction(np.zeros(16)))


def test_fit_reports_decay():
    gamma, C, phis = cones.fit_phi_decay(GENERIC, range(2, 7))
    assert gamma > 0.3
    assert np.all(phis <= C * np.exp(-gamma * np.arange(2, 7)) * (1 + 1e-12))
    assert math.isfinite(C)
