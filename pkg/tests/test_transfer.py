import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix import cohomology, transfer
from skewmix.errors import GridTooCoarse, InvariantViolation
from skewmix.grid import GridFunction
from skewmix.mapspec import example

GENERIC = example("tripling_cos")
PERTURBED = example("perturbed_tripling")


def test_tripling_density_is_one():
    h = transfer.invariant_density(GENERIC, 2**12)
    assert np.max(np.abs(h.values - 1.0)) <= 1e-10


def test_density_normalized_and_positive():
    h = transfer.invariant_density(PERTURBED, 2**11, interp="cubic")
    assert h.integral() == pytest.approx(1.0, abs=1e-12)
    assert h.values.min() > 0


def test_density_is_fixed_point():
    h = transfer.invariant_density(PERTURBED, 2**11)
    out = transfer.apply_twisted(PERTURBED, 0.0, h)
    assert out.l1 == pytest.approx(1.0, abs=1e-7)
    assert np.mean(np.abs(out.values / out.l1 - h.values)) < 1e-11


def test_density_against_orbit_histogram():
    h = transfer.invariant_density(PERTURBED, 2**12, interp="cubic")
    hist = transfer.orbit_histogram(PERTURBED, 32, n_points=10**6)
    assert np.mean(np.abs(h.values.reshape(32, -1).mean(axis=1) - hist)) < 0.02


@given(st.floats(-60, 60), st.integers(0, 2**31))
def test_l1_non_expansion(b, seed):
    rng = np.random.default_rng(seed)
    h = transfer.random_bv_probes(rng, 512, 1)[0]
    out = transfer.apply_twisted(PERTURBED, b, h)
    assert out.l1 <= h.l1 * (1 + 1e-12)


def test_callable_and_grid_paths_agree_for_smooth_input():
    fn = lambda x: np.cos(2 * np.pi * x) + 0.5  # noqa: E731
    a = transfer.apply_twisted(PERTURBED, 3.0, fn, 2, N=2**12).values
    b = transfer.apply_twisted(PERTURBED, 3.0, GridFunction.from_callable(fn, 2**12), 2, interp="cubic").values
    assert np.max(np.abs(a - b)) < 1e-8


@pytest.mark.parametrize("b", [1.0, 2 * math.pi])
def test_twisted_eigenfunction(b):
    sp = example("tripling_cohomologous_const")
    rep = cohomology.analyze(sp)
    c = 1 / math.sqrt(2)

    def fn(y):
        return np.exp(1j * b * rep.theta(y))

    out = transfer.apply_twisted(sp, b, fn, 1, N=2**14)
    x = GridFunction.midpoints(2**14)
    assert np.mean(np.abs(out.values - np.exp(1j * b * c) * fn(x))) < 1e-8


@pytest.mark.parametrize("b", [0.0, 5.0, 50.0])
def test_lasota_yorke_on_probes(b):
    rng = np.random.default_rng(7)
    consts = transfer.ly_constants(GENERIC)
    for h in transfer.random_bv_probes(rng, 1024, 10):
        for n in (1, 3, 5):
            assert transfer.empirical_ly_check(GENERIC, b, h, n, consts)


def test_scheme_constants_for_tripling():
    c = transfer.scheme_constants(GENERIC)
    assert c.rho1 == pytest.approx(2 / math.log(3))
    assert c.xi == pytest.approx(math.log(1.5) / (2 * math.log(3)))
    assert c.C_beta == pytest.approx(36.0)
    assert c.n(80.0) == math.ceil(c.rho1 * math.log(80)) + math.ceil(c.rho2 * math.log(80))
    assert 0 < c.gamma2_theory < c.gamma5
    assert c.alpha == pytest.approx(c.rho * c.gamma2_theory)


def test_hl_average_preserves_integral():
    rng = np.random.default_rng(3)
    h = transfer.random_bv_probes(rng, 2**12, 1)[0]
    avg = transfer.hl_average(h, 40.0, 0.2)
    assert avg.integral() == pytest.approx(h.integral(), abs=1e-12)
    assert avg.var <= h.var + 1e-12


def test_hl_average_needs_fine_grid():
    with pytest.raises((GridTooCoarse, InvariantViolation)):
        transfer.hl_average(GridFunction(np.ones(64)), 1000.0, 0.2)


def test_norm_decay_rejects_coarse_grid():
    c = transfer.scheme_constants(GENERIC)
    with pytest.raises(GridTooCoarse):
        transfer.norm_decay_experiment(GENERIC, 160.0, c, N=2**9)


def test_norm_decay_small_b_on_generic_map():
    c = transfer.scheme_constants(GENERIC)
    r = transfer.norm_decay_experiment(GENERIC, 40.0, c, n_random=5)
    assert r.max_ratio < 1
    assert r.gamma2_est > 0
