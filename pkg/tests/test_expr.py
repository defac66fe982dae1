import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewmix.errors import DomainError, ParseError, UnknownIdentifier
from skewmix.expr import BinOp, Call, Neg, Num, Pi, Var, constant_value, evaluate, parse_expression, to_source

leaf = st.one_of(
    st.floats(0.0, 100.0, allow_nan=False).map(Num),
    st.just(Pi()),
    st.just(Var("x")),
)
trees = st.recursive(
    leaf,
    lambda ch: st.one_of(
        ch.map(Neg),
        st.tuples(st.sampled_from("+-*/"), ch, ch).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(["sin", "cos"]), ch).map(lambda t: Call(*t)),
    ),
    max_leaves=12,
)


@given(trees)
def test_round_trip_preserves_values(e):
    x = np.linspace(0.05, 0.95, 7)
    with np.errstate(all="ignore"):
        try:
            a = evaluate(e, {"x": x})
        except DomainError:
            return
        b = evaluate(parse_expression(to_source(e)), {"x": x})
    np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-12, equal_nan=True)


@given(trees)
def test_round_trip_is_a_fixed_point(e):
    s = to_source(e)
    assert to_source(parse_expression(s)) == s


def test_precedence_of_power_and_minus():
    assert constant_value("-2^2") == -4.0
    assert constant_value("2^3^2") == 2.0**9
    assert constant_value("2^(-0.5)") == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_two_variables():
    e = parse_expression("cos(2*pi*u + x)", ("x", "u"))
    v = evaluate(e, {"x": np.array([0.0]), "u": np.array([0.25])})
    assert v[0] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("src", ["3*", "sin x", "(1+2", "1 2", ""])
def test_malformed_input(src):
    with pytest.raises(ParseError):
        parse_expression(src)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse_expression("3*y")


def test_log_of_negative_is_domain_error():
    with pytest.raises(DomainError):
        evaluate(parse_expression("log(x)"), {"x": np.array([-1.0])})
