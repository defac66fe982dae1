import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewmix import growth
from skewmix.mapspec import example

GENERIC = example("tripling_cos")
PERTURBED = example("perturbed_tripling")


@pytest.mark.parametrize("sp", [GENERIC, PERTURBED], ids=["tripling", "perturbed"])
def test_pieces_partition_initial_interval(sp):
    st_ = growth.evolve(sp, (0.1, 0.3), 6)
    assert st_.measure == pytest.approx(0.2, abs=1e-14)
    order = np.argsort(st_.lo)
    np.testing.assert_allclose(st_.lo[order][1:], st_.hi[order][:-1], atol=1e-12)
    assert np.all(st_.image_lengths <= sp.delta + 1e-12)


def test_images_are_images():
    sp = PERTURBED
    s = growth.evolve(sp, (0.2, 0.25), 4)
    x = s.lo.copy()
    for _ in range(4):
        x = sp.f(x)
    d = np.abs(np.mod(x - s.img_lo + 0.5, 1.0) - 0.5)
    assert d.max() < 1e-10


@settings(max_examples=15)
@given(a=st.floats(0.0, 0.6), frac=st.floats(0.05, 1.0), logeps=st.floats(-4, -2), n=st.integers(1, 7))
def test_growth_bound(a, frac, logeps, n):
    size = frac * GENERIC.delta
    lhs, rhs, ok = growth.growth_bound_check(GENERIC, (a, a + size), n, 10**logeps)
    assert ok, (lhs, rhs)


def test_single_interval_chain():
    value, bound, ok = growth.single_interval_chain_check(GENERIC, (0.1, 0.2), 3, 1e-2)
    assert ok
    assert value == pytest.approx(2e-2 / 27)


def test_literal_distance_reading_is_larger():
    s = growth.evolve(GENERIC, (0.0, 0.05), 6)
    assert growth.z_epsilon(GENERIC, s, 1e-3) >= growth.z_epsilon(GENERIC, s, 1e-3, own_endpoints_only=True) - 1e-15


def test_rejects_long_interval():
    with pytest.raises(ValueError):
        growth.growth_bound_check(GENERIC, (0.0, 0.5), 2, 1e-3)
