import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix import correlation as cor
from skewmix.errors import InsufficientData
from skewmix.mapspec import example


def test_fit_exact_exponential():
    v = 0.5 * np.exp(-0.3 * np.arange(15))
    z, r2 = cor.fit_rate(v)
    assert z == pytest.approx(0.3, abs=1e-9)
    assert r2 == pytest.approx(1.0)


def test_fit_constant_series_is_no_decay():
    s = cor.CorrelationSeries(np.full(12, 0.2)).with_fit()
    assert s.fit_zeta <= cor.NO_DECAY
    assert s.no_decay
    assert s.fit_r2 == 1.0


@given(st.floats(0.05, 1.0), st.floats(0.1, 10.0))
def test_fit_alternating_sign(zeta, c):
    v = c * (-1.0) ** np.arange(12) * np.exp(-zeta * np.arange(12))
    assert cor.fit_rate(v)[0] == pytest.approx(zeta, abs=1e-6)


def test_fit_needs_four_points():
    with pytest.raises(InsufficientData):
        cor.fit_rate([1.0, 0.5, 1e-20, 1e-20, 0.1])


def test_modes_of_sampled_function():
    g = cor.Observable2D.from_function("cos(2*pi*u)*cos(2*pi*x)", N=256, M=16)
    assert set(g.modes) == {-1, 1}
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(g.modes[1](x), 0.5 * np.cos(2 * np.pi * x), atol=1e-6)


def test_real_observable_modes_are_conjugate():
    g = cor.Observable2D.from_function("sin(2*pi*u + x) + 0.3*cos(4*pi*u)*x", N=256, M=16)
    x = np.linspace(0.1, 0.9, 9)
    for k in g.modes:
        np.testing.assert_allclose(g.modes[-k](x), np.conj(g.modes[k](x)), atol=1e-12)


def test_modes_reconstruct_function():
    fn = lambda x, u: np.cos(2 * np.pi * (u + x)) + 0.2 * np.sin(4 * np.pi * u)  # noqa: E731
    g = cor.Observable2D.from_function(fn, N=512, M=16)
    x, u = np.random.default_rng(0).random((2, 50))
    mode_sum = cor.Observable2D(g.modes, g.B)
    np.testing.assert_allclose(mode_sum(x, u), fn(x, u), atol=1e-7)


def test_from_modes_accepts_expressions_and_pairs():
    g = cor.Observable2D.from_modes({1: "0.5*cos(2*pi*x)", -1: ["0.5*cos(2*pi*x)", "0"]})
    assert g.modes[1](np.array([0.0]))[0] == pytest.approx(0.5)
    assert g.modes[-1](np.array([0.5]))[0] == pytest.approx(-0.5)


def test_zero_mean_fibre_observable_against_one():
    sp = example("perturbed_tripling")
    g = cor.Observable2D.from_function("cos(2*pi*u)", N=1024, M=16)
    one = cor.Observable2D.from_function("1 + 0*u", N=1024, M=16)
    s = cor.correlation_fourier(sp, g, one, 6, N=1024)
    assert np.max(np.abs(s.values)) < 1e-12


def test_direct_constants_are_uncorrelated():
    sp = example("tripling_cos")
    one = lambda x, u: np.ones(np.broadcast(x, u).shape)  # noqa: E731
    d = cor.correlation_direct(sp, one, one, 3, N=256, M=4)
    assert np.max(np.abs(d.values)) < 1e-14


def test_convention_lock_is_unambiguous():
    conv, errs = cor.lock_convention()
    assert conv == ("h_-k", "inside")
    assert errs[conv] < cor.LOCK_TOL
    assert all(v > 100 * errs[conv] for k, v in errs.items() if k != conv)


@pytest.mark.parametrize("name", ["perturbed_tripling", "tripling_cos", "tripling_cohomologous_const"])
def test_estimators_agree(name):
    sp = example(name)
    g, h = cor.smoke_pair()
    a = cor.correlation_fourier(sp, g, h, 6)
    b = cor.correlation_direct(sp, g, h, 6)
    assert np.max(np.abs(a.values - b.values)) <= max(1e-6, 3 * a.tail_bound)


def test_cohomologous_example_does_not_decay():
    sp = example("tripling_cohomologous_const")
    g = cor.Observable2D.from_function("cos(2*pi*u)", M=16)
    s = cor.correlation_fourier(sp, g, g, 30)
    assert s.no_decay
    assert np.min(np.abs(s.values)) > 0.01
    # theta o f^n and theta decouple for n >= 2 up to J_9(0.2 pi) ~ 1e-12
    t = (np.arange(256) + 0.5) / 256
    j0 = np.mean(np.cos(0.2 * math.pi * np.sin(2 * math.pi * t)))
    n = np.arange(2, 31)
    np.testing.assert_allclose(s.values.real[2:], 0.5 * j0**2 * np.cos(2 * math.pi * n / math.sqrt(2)), atol=1e-8)


def test_generic_example_decays():
    sp = example("tripling_cos")
    g = cor.Observable2D.from_function("cos(2*pi*u)*cos(2*pi*x)", M=16)
    s = cor.correlation_fourier(sp, g, g, 24, window=(0, 24))
    assert s.fit_zeta > 0.05
    assert s.fit_r2 >= 0.9
