"""Model definitions for the three one-loop effective-Lagrangian functions.

Spin-0 and spin-1/2 magnetic-background functions f_s(beta) and the self-dual
function f_SD(beta): exact weak-field coefficients, Hurwitz-zeta closed forms,
partial sums of the divergent expansion, a direct-quadrature oracle on the
proper-time integral, strong-field leading behavior, and the assembly of the
closed forms from Hadamard finite parts.
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from mpmath import mp, mpf, exp, ln, quad, sinh, cosh, sqrt

from . import finitepart
from .errors import DomainError, OracleFailureError
from .specfun import PrecisionContext, _bernoulli_even, _hurwitz_zeta, _to_mpf

__all__ = [
    "ModelId",
    "SeriesCoefficients",
    "coeff",
    "coefficients",
    "closed_form",
    "partial_sum",
    "direct_integral_oracle",
    "strong_field_leading",
    "finite_part_assembly",
]


class ModelId(enum.Enum):
    """Which effective Lagrangian: scalar, spinor, or self-dual background."""

    SPIN0 = "spin0"
    SPIN_HALF = "spin12"
    SELF_DUAL = "sd"

    @property
    def series_prefactor_power(self) -> int:
        """Power of beta multiplying the reduced series: 2 for spins, 1 for SD."""
        return 1 if self is ModelId.SELF_DUAL else 2

    @property
    def tail_power_offset(self) -> int:
        """Leading beta power p of the inverse-power extrapolant expansion."""
        return 0 if self is ModelId.SELF_DUAL else 1


# ---------------------------------------------------------------------------
# Exact weak-field coefficients.
# ---------------------------------------------------------------------------

def _ck(model: ModelId, k: int) -> Fraction:
    """c_k of the hyperbolic-kernel Taylor series, exact."""
    b2k = _bernoulli_even(k)
    if model is ModelId.SPIN0:
        return Fraction(2 - 2 ** (2 * k)) * b2k / factorial(2 * k)
    return -Fraction(2 ** (2 * k)) * b2k / factorial(2 * k)


def coeff(model: ModelId, k: int) -> Fraction:
    """Exact weak-field coefficient: a_k (spins, k >= 2) or the SD u_k (k >= 0).

    Spins: a_k = (-1)^k (2k-3)! c_k with c_k from the Bernoulli formulas; the
    function value is sum_k a_k (-beta)^k. SD: u_k = -(-1)^k B_{2k+4} /
    ((2k+2)(2k+4)), entering as beta * sum_k u_k (-beta)^k.
    """
    if model is ModelId.SELF_DUAL:
        if k < 0:
            raise DomainError(f"SD coefficient index must be >= 0, got {k}")
        return -Fraction((-1) ** k) * _bernoulli_even(k + 2) / ((2 * k + 2) * (2 * k + 4))
    if k < 2:
        raise DomainError(f"spin coefficient index must be >= 2, got {k}")
    return Fraction((-1) ** k) * factorial(2 * k - 3) * _ck(model, k)


@dataclass(frozen=True)
class SeriesCoefficients:
    """The first d+1 exact coefficients of the reduced alternating series.

    Reduced series: f = beta^p * sum_{j>=0} a[j] (-beta)^j with p = 2 (spins,
    a[j] = a_{j+2}) or p = 1 (SD, a[j] = u_j). All entries are positive; the
    sign alternation is carried by (-beta)^j.
    """

    model: ModelId
    a: tuple[Fraction, ...]

    @property
    def count(self) -> int:
        return len(self.a)


def coefficients(model: ModelId, count: int) -> SeriesCoefficients:
    """First `count` reduced-series coefficients of the model."""
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if model is ModelId.SELF_DUAL:
        a = tuple(coeff(model, j) for j in range(count))
    else:
        a = tuple(coeff(model, j + 2) for j in range(count))
    return SeriesCoefficients(model=model, a=a)


# ---------------------------------------------------------------------------
# Closed forms in terms of Hurwitz zeta and its s-derivative.
# ---------------------------------------------------------------------------

def _closed_form(model: ModelId, beta: mpf) -> mpf:
    rb = sqrt(beta)
    lb = ln(beta)
    if model is ModelId.SPIN0:
        nu = (1 + rb) / (2 * rb)
        return (beta * lb / 12 - lb / 4 + beta * (ln(mpf(4)) / 12 - mpf(1) / 6)
                - ln(mpf(4)) / 4 - mpf(1) / 4
                - 4 * beta * _hurwitz_zeta(mpf(-1), nu, deriv=True))
    if model is ModelId.SPIN_HALF:
        q = 1 / (2 * rb)
        return (4 * beta * _hurwitz_zeta(mpf(-1), q, deriv=True)
                + mpf(1) / 4 - beta / 3
                - beta * (ln(mpf(16)) + 2 * lb)
                * (mpf(-1) / 12 + 1 / (4 * rb) - 1 / (8 * beta)))
    q = 1 / rb
    return (_hurwitz_zeta(mpf(-1), q, deriv=True)
            - q * _hurwitz_zeta(mpf(0), q, deriv=True)
            - lb * (1 / (4 * beta) - mpf(1) / 24)
            - 3 / (4 * beta))


def closed_form(model: ModelId, beta, ctx: PrecisionContext) -> mpf:
    """Exact f_s(beta) or f_SD(beta) for beta > 0."""
    with ctx.work():
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError(
                "beta must be > 0 (the electric-background continuation is out of scope)")
        v = _closed_form(model, beta)
    return ctx.round(v)


# ---------------------------------------------------------------------------
# Partial sums of the divergent weak-field expansion.
# ---------------------------------------------------------------------------

def partial_sum(model: ModelId, beta, d: int, ctx: PrecisionContext) -> mpf:
    """Partial sum through reduced order d (that is, d+1 alternating terms).

    Spins: beta^2 sum_{j=0}^{d} a_{j+2} (-beta)^j; SD: beta sum_{j=0}^{d}
    u_j (-beta)^j. The index d matches the order labels of the convergence
    tables for the weak-field expansion.
    """
    if d < 1:
        raise DomainError(f"partial_sum requires d >= 1, got {d}")
    series = coefficients(model, d + 1)
    with ctx.work():
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError("beta must be > 0")
        x = -beta
        acc = mpf(0)
        for a in reversed(series.a):
            acc = acc * x + _to_mpf(a)
        v = beta ** model.series_prefactor_power * acc
    return ctx.round(v)


# ---------------------------------------------------------------------------
# Direct quadrature oracle on the proper-time representation.
# ---------------------------------------------------------------------------

_taylor_lock = threading.Lock()
_taylor_cache: dict[ModelId, list[Fraction]] = {m: [] for m in ModelId}


def _kernel_taylor(model: ModelId, count: int) -> list[Fraction]:
    """Taylor coefficients of the subtracted hyperbolic kernel, cached.

    Spins: chi(x) = sum_{k>=2} c_k x^{2k}, coefficient list starts at k=2.
    SD: w(tau) = sum_{k>=2} (2k-1) c^{(1/2)}_k tau^{2k-2}, same indexing.
    """
    cache = _taylor_cache[model]
    if count > len(cache):
        with _taylor_lock:
            while len(cache) < count:
                k = len(cache) + 2
                if model is ModelId.SELF_DUAL:
                    cache.append((2 * k - 1) * _ck(ModelId.SPIN_HALF, k))
                else:
                    cache.append(_ck(model, k))
    return cache[:count]


def _chi_series(model: ModelId, x: mpf) -> mpf:
    """Kernel via its Taylor series; safe and fast for |x| < 1/2."""
    x2 = x * x
    tol = mpf(10) ** (-(mp.dps + 5))
    acc = mpf(0)
    power = x2 * x2 if model is not ModelId.SELF_DUAL else x2
    k = 2
    while True:
        needed = k - 1
        cs = _kernel_taylor(model, needed)
        term = _to_mpf(cs[k - 2]) * power
        acc += term
        if abs(term) < tol * max(abs(acc), mpf(1) / 10 ** 8):
            return acc
        power *= x2
        k += 1


def _chi_hyperbolic(model: ModelId, x: mpf) -> mpf:
    if model is ModelId.SPIN0:
        return x / sinh(x) - 1 + x * x / 6
    if model is ModelId.SPIN_HALF:
        return 1 + x * x / 3 - x * cosh(x) / sinh(x)
    e = exp(-2 * x)
    return 4 * e / (1 - e) ** 2 - 1 / (x * x) + mpf(1) / 3


def _chi(model: ModelId, x: mpf) -> mpf:
    # Series below |x| = 1/2: well inside the pi radius of convergence and
    # clear of the catastrophic cancellation of the hyperbolic form near 0.
    if abs(x) < mpf(1) / 2:
        return _chi_series(model, x)
    return _chi_hyperbolic(model, x)


def direct_integral_oracle(model: ModelId, beta, ctx: PrecisionContext) -> mpf:
    """High-precision quadrature of the exact proper-time integral.

    Spins: integral of e^{-tau} chi(sqrt(beta) tau)/tau^3. SD: after
    sigma = 2 tau/sqrt(beta), (1/4) integral of e^{-sigma} w(sqrt(beta)
    sigma/2)/sigma. Integrands are O(tau) at the origin.
    """
    qdps = ctx.workdps + 15
    with mp.workdps(qdps):
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError("beta must be > 0")
        rb = sqrt(beta)
        if model is ModelId.SELF_DUAL:
            integrand = lambda s: exp(-s) * _chi(model, rb * s / 2) / (4 * s)
        else:
            integrand = lambda t: exp(-t) * _chi(model, rb * t) / t ** 3
        cutoff = int(qdps * ln(mpf(10))) + 10
        v, err = quad(integrand, [0, 1, cutoff], error=True, maxdegree=8)
        if err > abs(v) * mpf(10) ** (-ctx.digits) + mpf(10) ** (-qdps):
            raise OracleFailureError(
                f"quadrature error estimate {err} too large for {ctx.digits} digits")
    return ctx.round(v)


# ---------------------------------------------------------------------------
# Strong-field leading behavior.
# ---------------------------------------------------------------------------

def strong_field_leading(model: ModelId, beta, ctx: PrecisionContext | None = None) -> mpf:
    """Leading strong-field behavior; two displayed terms for the spin models.

    Spin0: beta ln(beta)/12 + beta ln(2)/6; SpinHalf: beta ln(beta)/6 +
    beta ln(2)/3; SD: ln(beta).
    """
    dps = ctx.workdps if ctx is not None else mp.dps
    with mp.workdps(dps):
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError("beta must be > 0")
        if model is ModelId.SPIN0:
            v = beta * ln(beta) / 12 + beta * ln(mpf(2)) / 6
        elif model is ModelId.SPIN_HALF:
            v = beta * ln(beta) / 6 + beta * ln(mpf(2)) / 3
        else:
            v = ln(beta)
    return ctx.round(v) if ctx is not None else v


# ---------------------------------------------------------------------------
# Assembly of the closed forms from Hadamard finite parts.
# ---------------------------------------------------------------------------

def finite_part_assembly(model: ModelId, beta, ctx: PrecisionContext) -> mpf:
    """f reassembled from finite-part integrals; an independent route.

    Spin0:  sqrt(b) fp_csch - fp_exp(1,3) + (b/6) fp_exp(1,1)
    SpinHalf: fp_exp(1,3) + (b/3) fp_exp(1,1) - sqrt(b) fp_coth
    SD:     fp_sinh2 - (1/4) fp_exp(2/sqrt(b),3) + (1/12) fp_exp(2/sqrt(b),1)
    """
    inner = PrecisionContext(ctx.workdps, ctx.guard)
    with ctx.work(extra=inner.guard):
        beta = _to_mpf(beta)
        if beta <= 0:
            raise DomainError("beta must be > 0")
        rb = sqrt(beta)
        if model is ModelId.SPIN0:
            v = (rb * finitepart.fp_csch(beta, inner)
                 - finitepart.fp_exp_over_xm(1, 3, inner)
                 + beta / 6 * finitepart.fp_exp_over_xm(1, 1, inner))
        elif model is ModelId.SPIN_HALF:
            v = (finitepart.fp_exp_over_xm(1, 3, inner)
                 + beta / 3 * finitepart.fp_exp_over_xm(1, 1, inner)
                 - rb * finitepart.fp_coth(beta, inner))
        else:
            b = 2 / rb
            v = (finitepart.fp_sinh2(beta, inner)
                 - finitepart.fp_exp_over_xm(b, 3, inner) / 4
                 + finitepart.fp_exp_over_xm(b, 1, inner) / 12)
    return ctx.round(v)
