import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from skewmix.roots import solve_increasing


def cubic(x):
    return x**3 + x, 3 * x**2 + 1


@given(st.lists(st.floats(0.0, 2.0), min_size=1, max_size=20))
def test_inverts_monotone_function(ts):
    t = np.array(ts)
    x = solve_increasing(cubic, t, 0.0, 1.0)
    np.testing.assert_allclose(cubic(x)[0], t, atol=1e-12)


def test_flat_derivative_falls_back_to_bisection():
    def f(x):
        return (x - 0.5) ** 3, 3 * (x - 0.5) ** 2

    x = solve_increasing(f, np.array([0.0, 0.001]), 0.0, 1.0)
    np.testing.assert_allclose(x, [0.5, 0.6], atol=1e-4)
