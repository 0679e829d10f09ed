"""Hadamard finite-part integrals.

Closed formulas for exponential kernels e^{-bx}/x^m, Mellin-derived closed
forms for the hyperbolic kernels that build the three model functions, and an
independent oracle that implements the canonical definition directly: cut the
integral off at epsilon, subtract the divergent group of terms, and take the
limit epsilon -> 0 numerically by Richardson extrapolation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

from mpmath import mp, mpf, exp, ln, quad, sqrt

from .errors import DomainError, OracleFailureError
from .specfun import (
    PrecisionContext,
    _digamma_int,
    _euler_gamma,
    _hurwitz_zeta,
    _to_mpf,
)

__all__ = [
    "FinitePartValue",
    "KernelDescriptor",
    "exp_kernel",
    "fp_exp_over_xm",
    "fp_canonical_oracle",
    "fp_csch",
    "fp_coth",
    "fp_sinh2",
]


@dataclass(frozen=True)
class FinitePartValue:
    """A finite-part value together with its kernel descriptor and method."""

    value: mpf
    kernel: str
    method: str  # "closed_formula" | "canonical_oracle"


@dataclass(frozen=True)
class KernelDescriptor:
    """Integrand f(x)/x^m described by the analytic factor f.

    func evaluates f at ambient precision; taylor holds exact rational Taylor
    coefficients f_0..f_{m-1} of f at 0 (enough to split off the divergence);
    decay is the exponential decay rate governing the upper cutoff.
    """

    func: Callable
    taylor: Sequence[Fraction]
    decay: Fraction
    label: str = "kernel"


def exp_kernel(b: Fraction, order: int) -> KernelDescriptor:
    """Descriptor for f(x) = e^{-bx} with `order` exact Taylor coefficients."""
    b = Fraction(b)
    coeffs = [Fraction(-b) ** j / factorial(j) for j in range(order)]
    return KernelDescriptor(
        func=lambda x, _b=b: exp(-_to_mpf(_b) * x),
        taylor=coeffs,
        decay=b,
        label=f"exp({b})",
    )


# ---------------------------------------------------------------------------
# Closed formula for the exponential kernel.
# ---------------------------------------------------------------------------

def _fp_exp_over_xm(b: mpf, m: int) -> mpf:
    # (-1)^m b^{m-1}/(m-1)! (ln b - psi(m))
    return ((-1) ** m * b ** (m - 1) / factorial(m - 1)
            * (ln(b) - _digamma_int(m)))


def fp_exp_over_xm(b, m: int, ctx: PrecisionContext) -> mpf:
    """Finite part of the integral of e^{-bx}/x^m over (0, inf), b > 0, m >= 1."""
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"fp_exp_over_xm requires integer m >= 1, got {m}")
    with ctx.work():
        b = _to_mpf(b)
        if b <= 0:
            raise DomainError(f"fp_exp_over_xm requires b > 0, got {b}")
        v = _fp_exp_over_xm(b, m)
    return ctx.round(v)


# ---------------------------------------------------------------------------
# Canonical epsilon-cutoff oracle.
# ---------------------------------------------------------------------------

def _divergent_part(taylor: Sequence[Fraction], m: int, eps: Fraction) -> mpf:
    """D_eps from exact Taylor coefficients, at exact rational eps.

    D_eps = sum_{i=0}^{m-2} f_i eps^{-(m-1-i)}/(m-1-i)  -  f_{m-1} ln eps.
    The inverse-power part is assembled as one exact rational so the huge
    cancellations against the cutoff integral do not contaminate the limit.
    """
    powers = Fraction(0)
    for i in range(m - 1):
        powers += taylor[i] * eps ** (-(m - 1 - i)) / (m - 1 - i)
    log_part = _to_mpf(taylor[m - 1]) * (ln(mpf(eps.numerator)) - ln(mpf(eps.denominator)))
    return _to_mpf(powers) - log_part


def _richardson_constant(eps_values: Sequence[Fraction], data: Sequence[mpf]) -> mpf:
    """Fit data(eps) = a0 + sum_i (a_i eps^i + b_i eps^i ln eps); return a0.

    Square collocation solve; the system is tiny, so precision is simply
    boosted far beyond any conceivable conditioning loss.
    """
    n = len(eps_values)
    with mp.workdps(mp.dps + 200):
        eps = [_to_mpf(e) for e in eps_values]
        cols = [[mpf(1)] * n]
        npairs = (n - 1) // 2
        for i in range(1, npairs + 1):
            cols.append([e ** i for e in eps])
            cols.append([e ** i * ln(e) for e in eps])
        if len(cols) < n:
            cols.append([e ** (npairs + 1) for e in eps])
        a = [[cols[c][r] for c in range(n)] for r in range(n)]
        x = [mpf(v) for v in data]
        for k in range(n):
            p = max(range(k, n), key=lambda i: abs(a[i][k]))
            if a[p][k] == 0:
                raise OracleFailureError("degenerate extrapolation system")
            a[k], a[p] = a[p], a[k]
            x[k], x[p] = x[p], x[k]
            for i in range(k + 1, n):
                lam = a[i][k] / a[k][k]
                for j in range(k, n):
                    a[i][j] -= lam * a[k][j]
                x[i] -= lam * x[k]
        for k in range(n - 1, -1, -1):
            acc = x[k]
            for j in range(k + 1, n):
                acc -= a[k][j] * x[j]
            x[k] = acc / a[k][k]
        return +x[0]


def fp_canonical_oracle(kernel: KernelDescriptor, m: int, ctx: PrecisionContext,
                        eps_grid: Sequence[int] | None = None) -> mpf:
    """Finite part of f(x)/x^m by the canonical cutoff definition.

    Integrates from eps to a cutoff where the exponential tail is negligible,
    subtracts the analytically known divergent terms, and extrapolates
    eps -> 0 over the grid. eps_grid is a decreasing sequence of exact rational
    epsilons; default is the geometric grid 10^{-j}, j = 2 .. digits/4.

    Convergence is checked by re-extrapolating without the smallest epsilon;
    disagreement beyond the oracle tolerance raises OracleFailureError.
    """
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"fp_canonical_oracle requires integer m >= 1, got {m}")
    if len(kernel.taylor) < m:
        raise DomainError(
            f"kernel supplies {len(kernel.taylor)} Taylor coefficients, need {m}")
    if eps_grid is not None:
        eps_values = [Fraction(e) for e in eps_grid]
    else:
        eps_values = [Fraction(1, 10 ** j) for j in range(2, ctx.digits // 4 + 1)]
    if len(eps_values) < 3 or any(e <= 0 for e in eps_values) or any(
            eps_values[i] <= eps_values[i + 1] for i in range(len(eps_values) - 1)):
        raise DomainError("eps_grid must be >= 3 strictly decreasing positive values")
    if eps_values[0] >= 1:
        raise DomainError("eps_grid values must lie below 1")
    # Quadrature precision covers the divergence magnitude eps_min^{-(m-1)}.
    eps_min = eps_values[-1]
    digits_span = len(str(eps_min.denominator)) - len(str(eps_min.numerator)) + 1
    qdps = ctx.workdps + (m - 1) * max(digits_span, 1) + 10
    with mp.workdps(qdps):
        decay = _to_mpf(kernel.decay)
        cutoff = int(qdps * ln(mpf(10)) / decay) + 10
        integrand = lambda x: kernel.func(x) / x ** m
        running = quad(integrand, [_to_mpf(eps_values[0]), 1, cutoff])
        tails = [running - _divergent_part(kernel.taylor, m, eps_values[0])]
        for prev, cur in zip(eps_values, eps_values[1:]):
            running += quad(integrand, [_to_mpf(cur), _to_mpf(prev)])
            tails.append(running - _divergent_part(kernel.taylor, m, cur))
    with mp.workdps(ctx.workdps + 20):
        a0 = _richardson_constant(eps_values, tails)
        check = _richardson_constant(eps_values[:-1], tails[:-1])
        tol = mpf(10) ** (-(ctx.digits // 2)) * max(abs(a0), mpf(1))
        if abs(a0 - check) > tol:
            raise OracleFailureError(
                f"epsilon extrapolation unstable: estimates differ by {abs(a0 - check)}")
    return ctx.round(a0)


# ---------------------------------------------------------------------------
# Closed forms for the hyperbolic kernels (Mellin route).
# ---------------------------------------------------------------------------

def fp_csch(beta, ctx: PrecisionContext) -> mpf:
    """Finite part of e^{-tau} csch(sqrt(beta) tau)/tau^2 over (0, inf).

    2 sqrt(b) [ (ln b + ln 4 + 2 gamma - 2) zeta(-1, nu) - 2 zeta'(-1, nu) ]
    with nu = (1 + sqrt(b))/(2 sqrt(b)).
    """
    with ctx.work():
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError(f"fp_csch requires beta > 0, got {beta}")
        rb = sqrt(beta)
        nu = (1 + rb) / (2 * rb)
        g = _euler_gamma()
        v = 2 * rb * ((ln(beta) + ln(mpf(4)) + 2 * g - 2) * _hurwitz_zeta(mpf(-1), nu)
                      - 2 * _hurwitz_zeta(mpf(-1), nu, deriv=True))
    return ctx.round(v)


def fp_coth(beta, ctx: PrecisionContext) -> mpf:
    """Finite part of e^{-tau} coth(sqrt(beta) tau)/tau^2 over (0, inf).

    sqrt(b)(ln 16 + 2 ln b) zeta(-1, q) + (gamma - 1)(4 sqrt(b) zeta(-1, q) - 1)
    - 4 sqrt(b) zeta'(-1, q), with q = 1/(2 sqrt(b)).
    """
    with ctx.work():
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError(f"fp_coth requires beta > 0, got {beta}")
        rb = sqrt(beta)
        q = 1 / (2 * rb)
        g = _euler_gamma()
        z1 = _hurwitz_zeta(mpf(-1), q)
        v = (rb * (ln(mpf(16)) + 2 * ln(beta)) * z1
             + (g - 1) * (4 * rb * z1 - 1)
             - 4 * rb * _hurwitz_zeta(mpf(-1), q, deriv=True))
    return ctx.round(v)


def fp_sinh2(beta, ctx: PrecisionContext) -> mpf:
    """Finite part of (1/4) e^{-2 tau/sqrt(beta)} csch^2(tau)/tau over (0, inf).

    (-gamma - ln 2)[zeta(-1, q) - q zeta(0, q)] + zeta'(-1, q) - q zeta'(0, q)
    with q = 1/sqrt(b); the 1/4 prefactor of the assembly is already included.
    """
    with ctx.work():
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError(f"fp_sinh2 requires beta > 0, got {beta}")
        q = 1 / sqrt(beta)
        g = _euler_gamma()
        v = ((-g - ln(mpf(2))) * (_hurwitz_zeta(mpf(-1), q)
                                  - q * _hurwitz_zeta(mpf(0), q))
             + _hurwitz_zeta(mpf(-1), q, deriv=True)
             - q * _hurwitz_zeta(mpf(0), q, deriv=True))
    return ctx.round(v)
