import math

import numpy as np
import pytest

from skewmix.errors import ConfigError, NonMonotoneBranch, NotCovering, NotExpanding, ParseError, TauPiecewiseConstant
from skewmix.mapspec import build_skew_product, example, from_config

COS = {"breakpoints": [0], "branches": ["cos(2*pi*x)"]}


def test_tripling_constants():
    sp = example("tripling_cos")
    assert sp.lambda_tilde == pytest.approx(3.0)
    assert sp.Lambda == pytest.approx(3.0)
    assert sp.C1 == pytest.approx(2 * math.pi, rel=1e-7)
    assert sp.delta == pytest.approx(1 / 3)
    assert sp.beta == pytest.approx(1.5)
    assert len(sp.laps) == 3


def test_one_branch_map_is_split_into_laps():
    sp = example("perturbed_tripling")
    assert sp.f.n_branches == 1
    assert len(sp.laps) == 3
    assert sp.lambda_tilde == pytest.approx(3 - 0.1 * math.pi, rel=1e-6)


def test_doubling_is_rejected():
    with pytest.raises(NotExpanding):
        example("doubling")


def test_non_monotone_branch():
    with pytest.raises(NonMonotoneBranch):
        build_skew_product({"breakpoints": [0], "branches": ["3*x + 0.6*sin(2*pi*x)"]}, COS)


def test_map_that_does_not_cover():
    starts = [0.0, 0.2, 0.4, 0.6, 0.8]
    f = {"breakpoints": starts, "branches": [f"2.5*(x - {a})" for a in starts]}
    with pytest.raises(NotCovering):
        build_skew_product(f, COS)


def test_constant_tau_is_a_verdict():
    with pytest.raises(TauPiecewiseConstant) as info:
        example("constant_tau")
    assert info.value.theta == 0.0
    assert info.value.exit_code == 0


def test_step_tau_allowed_with_option():
    sp = example("tripling_step_tau")
    assert sp.tau_piecewise_constant
    assert sp.C1 == 0.0


def test_bad_expression():
    with pytest.raises(ParseError):
        build_skew_product({"breakpoints": [0], "branches": ["3*x +"]}, COS)


def test_missing_keys():
    with pytest.raises(ConfigError):
        from_config({"f": {"breakpoints": [0], "branches": ["3*x"]}})


def test_skew_map_wraps_fibre():
    sp = example("tripling_cos")
    x, u = sp.F(np.array([0.0]), np.array([0.5]))
    assert x[0] == pytest.approx(0.0)
    assert u[0] == pytest.approx(0.5)


def test_config_hash_is_stable():
    assert example("tripling_cos").config_hash() == example("tripling_cos").config_hash()
    assert example("tripling_cos").config_hash() != example("perturbed_tripling").config_hash()
