"""Stieltjes moment problem: moments, the Laguerre-basis linear system, and
the reconstructed density rho(x) = x g(x).

The positive-power moments are exact rationals; the system matrix P(n, m) is
exact integers. Entries span hundreds of orders of magnitude, so the LU solve
runs at a working precision boosted by the matrix's own magnitude span; the
recorded residual then reflects genuine backward error, not representation
loss.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from mpmath import mp, mpc, mpf, exp

from .errors import ConditioningError, ConditioningWarning, ConsistencyError, DomainError
from .models import ModelId, SeriesCoefficients
from .specfun import PrecisionContext, _laguerre_seq, _to_mpf

__all__ = [
    "GENERATOR_VERSION",
    "MomentVector",
    "ReconstructionCoefficients",
    "moments_from_coeffs",
    "build_P",
    "build_P_exact",
    "solve_coeffs",
    "residual_norm_of",
    "rho_eval",
]

# Bump when coefficient-generating code changes; persisted in cache headers.
GENERATOR_VERSION = "1"


@dataclass(frozen=True)
class MomentVector:
    """Exact moments mu_{2k}, k = 0..d, of the Stieltjes density.

    mu_{2k} equals the reduced weak-field coefficient: a_{k+2} for the spin
    models, u_k for SD. Kept rational so the ill-conditioned solve gets exact
    right-hand sides.
    """

    model: ModelId
    mu: tuple[Fraction, ...]

    def __post_init__(self):
        if any(m <= 0 for m in self.mu):
            raise ConsistencyError("moments of an alternating Stieltjes series must be > 0")

    @property
    def d(self) -> int:
        return len(self.mu) - 1


@dataclass(frozen=True)
class ReconstructionCoefficients:
    """Solved Laguerre coefficients c_m defining g(x) = e^{-x/2} sum c_m L_m(x).

    c entries are BigReal at the (internally boosted) solve precision; digits
    records the nominal precision requested.
    """

    model: ModelId
    d: int
    c: tuple[mpf, ...]
    digits: int
    residual_norm: mpf

    def __post_init__(self):
        if len(self.c) != self.d + 1:
            raise DomainError(f"expected {self.d + 1} coefficients, got {len(self.c)}")


def moments_from_coeffs(series: SeriesCoefficients, d: int) -> MomentVector:
    """Map the first d+1 reduced expansion coefficients to moments."""
    if series.count < d + 1:
        raise DomainError(
            f"series has {series.count} coefficients, need {d + 1}")
    return MomentVector(model=series.model, mu=tuple(series.a[: d + 1]))


@lru_cache(maxsize=4)
def build_P_exact(d: int) -> tuple[tuple[int, ...], ...]:
    """Exact integer matrix P(n,m) = m! 2^{2n+2} sum_k (-2)^k (2n+k+1)!/((k!)^2 (m-k)!).

    Row-wise: u_k = (-2)^k (2n+k+1)!/k! is built by an exact integer
    recurrence, then P(n,m) = 2^{2n+2} sum_{k<=m} C(m,k) u_k.
    """
    if d < 0:
        raise DomainError(f"build_P requires d >= 0, got {d}")
    rows = []
    for n in range(d + 1):
        u = [0] * (d + 1)
        r = factorial(2 * n + 1)
        u[0] = r
        for k in range(d):
            r = r * (2 * n + k + 2) // (k + 1)
            u[k + 1] = (-2) ** (k + 1) * r
        pref = 2 ** (2 * n + 2)
        rows.append(tuple(pref * sum(comb(m, k) * u[k] for k in range(m + 1))
                          for m in range(d + 1)))
    return tuple(rows)


def _magnitude_digits(rows) -> int:
    """Decimal magnitude of the largest |entry| (int or mpf rows)."""
    top = 0
    for row in rows:
        for x in row:
            if isinstance(x, int):
                top = max(top, abs(x).bit_length())
            else:
                top = max(top, mp.mag(x))
    return int(top * 0.30103) + 1


def build_P(d: int, ctx: PrecisionContext) -> list[list[mpf]]:
    """P as BigReal entries, rounded at a precision carrying the full span.

    The span-extended precision keeps the rounding error of every entry below
    the working tolerance relative to the smallest moments, which is what the
    downstream residual guarantee needs.
    """
    exact = build_P_exact(d)
    dps = ctx.workdps + _magnitude_digits(exact) + 10
    with mp.workdps(dps):
        return [[mpf(x) for x in row] for row in exact]


def _lu_solve(a: list[list[mpf]], b: list[mpf]) -> list[mpf]:
    """In-place LU with partial pivoting; deterministic elimination order."""
    n = len(a)
    x = list(b)
    scale = max((abs(v) for row in a for v in row), default=mpf(0))
    floor = scale * mpf(10) ** (-(mp.dps - 5))
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        colmax = abs(a[p][k])
        if colmax == 0 or colmax < floor:
            raise ConditioningError(
                f"singular pivot at column {k}: magnitude {colmax}")
        if p != k:
            a[k], a[p] = a[p], a[k]
            x[k], x[p] = x[p], x[k]
        akk = a[k][k]
        for i in range(k + 1, n):
            lam = a[i][k] / akk
            if lam:
                ai, ak = a[i], a[k]
                for j in range(k + 1, n):
                    ai[j] -= lam * ak[j]
                x[i] -= lam * x[k]
    for k in range(n - 1, -1, -1):
        acc = x[k]
        row = a[k]
        for j in range(k + 1, n):
            acc -= row[j] * x[j]
        x[k] = acc / row[k]
    return x


def solve_coeffs(P, mu: MomentVector, ctx: PrecisionContext) -> ReconstructionCoefficients:
    """Solve sum_m c_m P(n,m) = mu_{2n}, n = 0..d, by LU with partial pivoting.

    Working precision is raised by the magnitude span of P so the backward
    residual lands at the nominal working tolerance. Requesting fewer digits
    than moments (the precision rule) emits ConditioningWarning.
    """
    d = mu.d
    if len(P) != d + 1 or any(len(row) != d + 1 for row in P):
        raise DomainError(f"P must be {d + 1}x{d + 1} to match the moment vector")
    if ctx.digits < d + 1:
        warnings.warn(
            f"working precision {ctx.digits} below the moments count {d + 1}; "
            "reconstruction accuracy is not guaranteed",
            ConditioningWarning, stacklevel=2)
    dps = ctx.workdps + _magnitude_digits(P) + 10
    with mp.workdps(dps):
        a = [[_to_mpf(x) if isinstance(x, int) else mpf(x) for x in row] for row in P]
        rhs = [_to_mpf(f) for f in mu.mu]
        c = _lu_solve(a, rhs)
        res = _residual(P, c, mu)
    return ReconstructionCoefficients(
        model=mu.model, d=d, c=tuple(c), digits=ctx.digits, residual_norm=res)


def _residual(P, c, mu: MomentVector) -> mpf:
    """Relative 2-norm residual ||P c - mu|| / ||mu|| at ambient precision."""
    num = mpf(0)
    den = mpf(0)
    for n in range(mu.d + 1):
        acc = mpf(0)
        row = P[n]
        for m in range(mu.d + 1):
            entry = row[m]
            acc += (_to_mpf(entry) if isinstance(entry, int) else entry) * c[m]
        target = _to_mpf(mu.mu[n])
        num += (acc - target) ** 2
        den += target ** 2
    return (num / den) ** mpf("0.5")


def residual_norm_of(rec: ReconstructionCoefficients, mu: MomentVector,
                     ctx: PrecisionContext) -> mpf:
    """Recompute the relative moment residual of stored coefficients."""
    if mu.d != rec.d:
        raise DomainError(
            f"moment vector of degree {mu.d} does not match reconstruction degree {rec.d}")
    exact = build_P_exact(rec.d)
    dps = ctx.workdps + _magnitude_digits(exact) + 10
    with mp.workdps(dps):
        return _residual(exact, [mpf(x) for x in rec.c], mu)


def rho_eval(rec: ReconstructionCoefficients, z, ctx: PrecisionContext):
    """Reconstructed density rho(z) = z e^{-z/2} sum_m c_m L_m(z).

    Real input yields a real value; complex input a complex one.
    """
    with ctx.work():
        zz = mpc(z) if isinstance(z, (mpc, complex)) else _to_mpf(z)
        lag = _laguerre_seq(zz, rec.d)
        acc = lag[0] * 0
        for cm, lm in zip(rec.c, lag):
            acc += cm * lm
        v = zz * exp(-zz / 2) * acc
    return ctx.round(v)
