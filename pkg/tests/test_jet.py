import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix.expr import parse_expression
from skewmix.jet import Jet2, eval_jet2

EXPRS = [
    "3*x + 0.05*sin(2*pi*x)",
    "cos(2*pi*x)^2 - x^3",
    "exp(0.3*x)/(2 + sin(x))",
    "log(1 + x^2)*x",
    "(x + 0.5)^(-0.5)",
]


@pytest.mark.parametrize("src", EXPRS)
@given(x=st.floats(0.05, 0.95))
def test_derivatives_match_finite_differences(src, x):
    e = parse_expression(src)
    j = eval_jet2(e, np.array([x]))
    h = 1e-5
    f = lambda t: eval_jet2(e, np.array([t])).value[0]  # noqa: E731
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    assert j.d1[0] == pytest.approx(d1, rel=1e-7, abs=1e-7)
    assert j.d2[0] == pytest.approx(d2, rel=1e-3, abs=1e-3)


def test_product_rule_by_hand():
    a = Jet2(2.0, 3.0, 5.0)
    b = Jet2(7.0, 11.0, 13.0)
    c = a * b
    assert (c.value, c.d1, c.d2) == (14.0, 2 * 11 + 3 * 7, 5 * 7 + 2 * 3 * 11 + 2 * 13)


def test_compose_is_chain_rule():
    x = Jet2.variable(0.3)
    y = x.compose(np.sin(0.3), np.cos(0.3), -np.sin(0.3))
    assert y.d1 == pytest.approx(np.cos(0.3))
    assert y.d2 == pytest.approx(-np.sin(0.3))
