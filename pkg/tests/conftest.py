"""Shared fixtures: precision contexts and memoized reconstructions.

High-order moment solves are reused across tests; they are deterministic,
so session-scope caching only trades time, not coverage.
"""
import re
from functools import lru_cache

import pytest
from mpmath import mp, mpf

from heulag import (
    ModelId,
    PrecisionContext,
    build_P_exact,
    coefficients,
    moments_from_coeffs,
    solve_coeffs,
)


@lru_cache(maxsize=None)
def _reconstruct(model: ModelId, moments: int, digits: int):
    ctx = PrecisionContext(digits)
    series = coefficients(model, max(moments, 2))
    mu = moments_from_coeffs(series, moments - 1)
    return solve_coeffs(build_P_exact(moments - 1), mu, ctx)


@pytest.fixture(scope="session")
def reconstruct():
    return _reconstruct


@pytest.fixture(scope="session")
def ctx50():
    return PrecisionContext(50)


@pytest.fixture(scope="session")
def ctx60():
    return PrecisionContext(60)


@pytest.fixture(scope="session")
def ctx100():
    return PrecisionContext(100)


def printed_match(value, printed: str) -> bool:
    """True when every digit of the printed decimal literal is correct, i.e.
    the value lies within one unit in the last printed place (covers tables
    that truncate as well as ones that round)."""
    with mp.workdps(len(printed) + 25):
        t = mpf(printed)
        mantissa = re.sub(r"[eE].*$", "", printed).replace("-", "").replace(".", "")
        sig = len(mantissa.lstrip("0"))
        ulp = mpf(10) ** (int(mp.floor(mp.log10(abs(t)))) - sig + 1)
        return abs(value - t) <= ulp


def rel_err(value, target) -> mpf:
    with mp.workdps(mp.dps + 30):
        return abs(value - target) / abs(target)
