import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix.grid import GridFunction, cubic_stencil

values = st.lists(st.floats(-10, 10), min_size=4, max_size=64).map(np.array)


@given(values)
def test_bv_dominates_l1(v):
    g = GridFunction(v)
    assert g.bv >= g.l1 - 1e-12
    assert g.var >= 0


@given(values, st.floats(0.1, 100.0))
def test_weighted_norm_is_monotone_in_b(v, b):
    g = GridFunction(v)
    assert g.bnorm(b) >= g.bnorm(2 * b) - 1e-12


def test_indicator_variation_counts_both_jumps():
    v = np.zeros(16)
    v[3:7] = 1.0
    assert GridFunction(v).var == pytest.approx(2.0)


def test_cubic_stencil_partition_of_unity():
    x = np.random.default_rng(0).random(100)
    _, w = cubic_stencil(x, 32)
    np.testing.assert_allclose(w.sum(axis=-1), 1.0, atol=1e-14)


def test_interpolation_error_is_fourth_order_scale():
    fn = lambda x: np.sin(2 * np.pi * x)  # noqa: E731
    x = np.linspace(0, 1, 1001)
    errs = [np.max(np.abs(GridFunction.from_callable(fn, N).interpolate(x) - fn(x))) for N in (64, 128)]
    assert errs[1] < errs[0] / 6
    assert errs[1] < 1e-5


def test_lookup_is_piecewise_constant():
    g = GridFunction(np.arange(4.0))
    np.testing.assert_array_equal(g(np.array([0.0, 0.3, 0.99, 1.1])), [0, 1, 3, 0])
