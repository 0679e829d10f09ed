"""Moment layer: exact moment vectors, the P matrix, the linear solve and its
backward residual, and evaluation of the reconstructed density."""
import math
import warnings
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from heulag import (
    ConditioningWarning,
    ConsistencyError,
    DomainError,
    ModelId,
    MomentVector,
    PrecisionContext,
    build_P,
    build_P_exact,
    coefficients,
    laguerre_eval,
    moments_from_coeffs,
    residual_norm_of,
    rho_eval,
    solve_coeffs,
)


# ---------------------------------------------------------------------------
# Moment vectors.
# ---------------------------------------------------------------------------

def test_moments_are_reduced_series_coefficients():
    s = coefficients(ModelId.SPIN0, 5)
    mu = moments_from_coeffs(s, 2)
    assert mu.mu == (Fraction(7, 360), Fraction(31, 2520), Fraction(127, 5040))
    s_sd = coefficients(ModelId.SELF_DUAL, 5)
    mu_sd = moments_from_coeffs(s_sd, 2)
    assert mu_sd.mu == (Fraction(1, 240), Fraction(1, 1008), Fraction(1, 1440))


def test_moment_vector_rejects_nonpositive():
    with pytest.raises(ConsistencyError):
        MomentVector(model=ModelId.SPIN0, mu=(Fraction(1, 2), Fraction(-1, 3)))


def test_moments_from_coeffs_requires_enough_terms():
    s = coefficients(ModelId.SPIN0, 3)
    with pytest.raises(DomainError):
        moments_from_coeffs(s, 10)


# ---------------------------------------------------------------------------
# The P matrix (moments of the Laguerre basis densities).
# ---------------------------------------------------------------------------

def test_P_corner_entries():
    P = build_P_exact(1)
    assert P[0][0] == 4
    assert P[0][1] == -12
    assert P[1][0] == 96


def genfun_entry(n: int, m: int) -> int:
    # Independent positive-sum route through the generating function:
    # P(n,m) = (-1)^m (2n+1)! 2^{2n+2} sum_i C(2n+1,i) C(2n+1+m-i, m-i)
    total = sum(math.comb(2 * n + 1, i) * math.comb(2 * n + 1 + m - i, m - i)
                for i in range(min(2 * n + 1, m) + 1))
    return (-1) ** m * math.factorial(2 * n + 1) * 2 ** (2 * n + 2) * total


def test_P_against_generating_function_oracle():
    d = 12
    P = build_P_exact(d)
    for n in range(d + 1):
        for m in range(d + 1):
            assert P[n][m] == genfun_entry(n, m), (n, m)


def test_P_alternating_signs_along_rows():
    P = build_P_exact(6)
    for n in range(7):
        for m in range(7):
            assert (P[n][m] > 0) == (m % 2 == 0)


def test_build_P_rounds_exact_entries(ctx60):
    Pf = build_P(4, ctx60)
    Pe = build_P_exact(4)
    with mp.workdps(120):
        for n in range(5):
            for m in range(5):
                assert abs(Pf[n][m] - Pe[n][m]) <= abs(mpf(Pe[n][m])) * mpf("1e-60")


# ---------------------------------------------------------------------------
# Solving for the basis coefficients.
# ---------------------------------------------------------------------------

def elimination_solve(d: int, model: ModelId):
    """Exact Gaussian elimination over the rationals; independent of the
    float LU route in solve_coeffs."""
    s = coefficients(model, d + 2)
    mu = list(moments_from_coeffs(s, d).mu)
    A = [[Fraction(x) for x in row] for row in build_P_exact(d)]
    n = d + 1
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        mu[col], mu[piv] = mu[piv], mu[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
                mu[r] -= f * mu[col]
    return [mu[i] / A[i][i] for i in range(n)]


@pytest.mark.parametrize("d", [0, 1, 4, 8])
@pytest.mark.parametrize("model", [ModelId.SPIN0, ModelId.SELF_DUAL])
def test_solve_matches_exact_elimination(d, model, ctx60):
    s = coefficients(model, d + 2)
    mu = moments_from_coeffs(s, d)
    rec = solve_coeffs(build_P_exact(d), mu, ctx60)
    exact = elimination_solve(d, model)
    with mp.workdps(100):
        for cf, ce in zip(rec.c, exact):
            ce_f = mpf(ce.numerator) / ce.denominator
            assert abs(cf - ce_f) < mpf(10) ** (-(ctx60.digits - 5)) * max(1, abs(ce_f))


def test_solve_d0_is_mu0_over_4(ctx60):
    s = coefficients(ModelId.SPIN0, 3)
    mu = moments_from_coeffs(s, 0)
    rec = solve_coeffs(build_P_exact(0), mu, ctx60)
    with mp.workdps(80):
        want = mpf(7) / 360 / 4
        assert abs(rec.c[0] - want) < mpf("1e-55")


def test_residual_meets_invariant_d50(ctx60, reconstruct):
    rec = reconstruct(ModelId.SPIN0, 51, 60)  # 51 moments -> degree d = 50
    assert rec.residual_norm < mpf(10) ** (-(ctx60.digits - 10))
    # and the recomputed backward residual agrees with the stored one
    s = coefficients(ModelId.SPIN0, 52)
    mu = moments_from_coeffs(s, 50)
    fresh = residual_norm_of(rec, mu, ctx60)
    assert fresh <= rec.residual_norm * 10 + mpf("1e-300")


def test_low_precision_emits_conditioning_warning():
    s = coefficients(ModelId.SPIN0, 41)
    mu = moments_from_coeffs(s, 40)
    with pytest.warns(ConditioningWarning):
        solve_coeffs(build_P_exact(40), mu, PrecisionContext(30))


def test_solve_rejects_shape_mismatch(ctx60):
    s = coefficients(ModelId.SPIN0, 6)
    mu = moments_from_coeffs(s, 4)
    with pytest.raises(DomainError):
        solve_coeffs(build_P_exact(3), mu, ctx60)


# ---------------------------------------------------------------------------
# Density evaluation.
# ---------------------------------------------------------------------------

def test_rho_at_zero_vanishes(ctx60, reconstruct):
    rec = reconstruct(ModelId.SPIN0, 20, 60)
    assert rho_eval(rec, mpf(0), ctx60) == 0


def test_rho_real_input_gives_real_output(ctx60, reconstruct):
    rec = reconstruct(ModelId.SPIN0, 20, 60)
    v = rho_eval(rec, mpf("1.5"), ctx60)
    assert isinstance(v, mpf)


def test_rho_conjugate_symmetry(ctx60, reconstruct):
    rec = reconstruct(ModelId.SPIN0, 20, 60)
    zp = rho_eval(rec, mp.mpc(1, 1), ctx60)
    zm = rho_eval(rec, mp.mpc(1, -1), ctx60)
    # compare components with exact negation: mpc.conjugate() and unary minus
    # both round at ambient precision and would mask (or fake) asymmetry
    assert zp.real == zm.real
    assert zp.imag == mp.fneg(zm.imag, exact=True)


def test_rho_reproduces_moments_through_P(ctx60, reconstruct):
    # int x^{2k+1} e^{-x/2} L_m(x)... folded into P: mu_k == sum_m c_m P(k,m)
    d = 12
    rec = reconstruct(ModelId.SPIN0, d + 1, 60)
    P = build_P_exact(d)
    s = coefficients(ModelId.SPIN0, d + 2)
    mu = moments_from_coeffs(s, d)
    with mp.workdps(150):
        for k in range(d + 1):
            acc = mpf(0)
            for m in range(d + 1):
                acc += rec.c[m] * P[k][m]
            target = mpf(mu.mu[k].numerator) / mu.mu[k].denominator
            assert abs(acc - target) < mpf("1e-45") * max(1, abs(target))


def test_rho_quadrature_recovers_moments(ctx60, reconstruct):
    # numerically integrate x^{2k} rho(x) over [0, inf): the k-th input moment
    d = 8
    rec = reconstruct(ModelId.SPIN0, d + 1, 60)
    panels = [0, 1, 5, 20, 60, 140, 280, 420]
    with ctx60.work():
        m0 = mp.quad(lambda x: rho_eval(rec, x, ctx60), panels)
        m1 = mp.quad(lambda x: x ** 2 * rho_eval(rec, x, ctx60), panels)
        assert abs(m0 - mpf(7) / 360) < mpf("1e-30")
        assert abs(m1 - mpf(31) / 2520) < mpf("1e-30")
