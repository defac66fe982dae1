import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix import kernels
from skewmix.mapspec import example
from skewmix.transfer import apply_twisted, collocation

native = pytest.mark.skipif(kernels._native is None, reason="compiled extension not built")


@native
@given(st.integers(1, 200), st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**31))
def test_gather_apply_backends_agree(n, k, cols, seed):
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n, size=(n, k))
    w = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    w[rng.random((n, k)) < 0.2] = 0
    h = rng.normal(size=(n, cols)) + 1j * rng.normal(size=(n, cols))
    a = kernels.gather_apply(idx, w, h, backend="native")
    b = kernels.gather_apply(idx, w, h, backend="python")
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


@native
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 2), st.floats(0, 1)), min_size=1, max_size=100))
def test_overlap_mass_backends_agree(rows):
    c, hw, wt = (np.array(v) for v in zip(*rows))
    a = kernels.overlap_mass(c - hw, c + hw, wt, backend="native")
    b = kernels.overlap_mass(c - hw, c + hw, wt, backend="python")
    np.testing.assert_allclose(a, b, atol=1e-12)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 2), st.floats(0, 1)), min_size=1, max_size=40))
def test_overlap_mass_matches_quadratic_count(rows):
    c, hw, wt = (np.array(v) for v in zip(*rows))
    lo, hi = c - hw, c + hw
    meet = (lo[None, :] <= hi[:, None]) & (hi[None, :] >= lo[:, None])
    np.testing.assert_allclose(kernels.overlap_mass(lo, hi, wt, backend="python"), meet @ wt, atol=1e-12)


@native
@pytest.mark.parametrize("threads", [1, 2, 4])
def test_operator_results_do_not_depend_on_threads(threads):
    sp = example("perturbed_tripling")
    h = np.exp(2j * np.pi * np.arange(1024) / 1024)
    from skewmix.grid import GridFunction

    ref = apply_twisted(sp, 7.0, GridFunction(h), 3, threads=1).values
    out = apply_twisted(sp, 7.0, GridFunction(h), 3, threads=threads).values
    assert np.array_equal(ref, out)


def test_native_and_fallback_operator_agree():
    sp = example("perturbed_tripling")
    idx, w = collocation(sp, 512).table(3.0, "cubic")
    h = np.random.default_rng(1).normal(size=512).astype(complex)
    ref = kernels.gather_apply(idx, w, h, backend="python")
    out = kernels.gather_apply(idx, w, h)
    np.testing.assert_allclose(out, ref, rtol=1e-13, atol=1e-14)
