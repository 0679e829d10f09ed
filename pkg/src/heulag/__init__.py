"""Arbitrary-precision one-loop effective-Lagrangian toolkit.

Closed-form evaluation of the spin-0, spin-1/2, and self-dual background
functions, their divergent weak-field expansions, and resummation of those
expansions by finite-part integration of the underlying generalized
Stieltjes representation, with Pade and delta-transformation baselines.
"""
from .comparators import PadeSpec, pade_eval, weniger_delta
from .errors import (
    CacheMismatchError,
    ConditioningError,
    ConditioningWarning,
    ConsistencyError,
    DegeneracyError,
    DomainError,
    HeulagError,
    OracleFailureError,
    PoleError,
    TruncationWarning,
)
from .extrapolant import (
    ExtrapolationResult,
    delta_term,
    extrapolate,
    fp_negative_moment_kernel,
    tail_sum,
)
from .finitepart import (
    FinitePartValue,
    KernelDescriptor,
    exp_kernel,
    fp_canonical_oracle,
    fp_coth,
    fp_csch,
    fp_exp_over_xm,
    fp_sinh2,
)
from .models import (
    ModelId,
    SeriesCoefficients,
    closed_form,
    coeff,
    coefficients,
    direct_integral_oracle,
    finite_part_assembly,
    partial_sum,
    strong_field_leading,
)
from .momentrec import (
    GENERATOR_VERSION,
    MomentVector,
    ReconstructionCoefficients,
    build_P,
    build_P_exact,
    moments_from_coeffs,
    residual_norm_of,
    rho_eval,
    solve_coeffs,
)
from .specfun import (
    BigComplex,
    BigReal,
    PrecisionContext,
    bernoulli,
    digamma_int,
    euler_gamma,
    hurwitz_zeta,
    hurwitz_zeta_sderiv,
    laguerre_eval,
    ln_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "BigComplex",
    "BigReal",
    "CacheMismatchError",
    "ConditioningError",
    "ConditioningWarning",
    "ConsistencyError",
    "DegeneracyError",
    "DomainError",
    "ExtrapolationResult",
    "FinitePartValue",
    "GENERATOR_VERSION",
    "HeulagError",
    "KernelDescriptor",
    "ModelId",
    "MomentVector",
    "OracleFailureError",
    "PadeSpec",
    "PoleError",
    "PrecisionContext",
    "ReconstructionCoefficients",
    "SeriesCoefficients",
    "TruncationWarning",
    "bernoulli",
    "build_P",
    "build_P_exact",
    "closed_form",
    "coeff",
    "coefficients",
    "delta_term",
    "digamma_int",
    "direct_integral_oracle",
    "euler_gamma",
    "exp_kernel",
    "extrapolate",
    "finite_part_assembly",
    "fp_canonical_oracle",
    "fp_coth",
    "fp_csch",
    "fp_exp_over_xm",
    "fp_negative_moment_kernel",
    "fp_sinh2",
    "hurwitz_zeta",
    "hurwitz_zeta_sderiv",
    "laguerre_eval",
    "ln_gamma",
    "moments_from_coeffs",
    "pade_eval",
    "partial_sum",
    "residual_norm_of",
    "rho_eval",
    "solve_coeffs",
    "strong_field_leading",
    "tail_sum",
    "weniger_delta",
]
