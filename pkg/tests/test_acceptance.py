"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Tolerances and budgets live in :mod:`skewmix.suite`.
"""

import json

import pytest

from skewmix import suite


@pytest.mark.slow
@pytest.mark.parametrize("check", suite.CHECKS, ids=[f"criterion_{k:02d}_{c.__name__[6:]}" for k, c in enumerate(suite.CHECKS, 1)])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print(f"\n{result.line()} {json.dumps(result.details, default=str, sort_keys=True)}")
    assert result.passed, result.details
