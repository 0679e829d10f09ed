"""Exception and warning hierarchy shared across the package."""


class HeulagError(Exception):
    """Base class for all package errors."""


class DomainError(HeulagError, ValueError):
    """Input outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at, or numerically indistinguishable from, a pole."""


class DegeneracyError(HeulagError):
    """A linear system required by a transformation is singular."""


class ConditioningError(HeulagError):
    """A pivot fell below working precision in the moment-problem solve."""


class ConsistencyError(HeulagError):
    """An internal cross-check failed (e.g. broken conjugate symmetry)."""


class OracleFailureError(HeulagError):
    """A numerical oracle (quadrature or extrapolation) did not converge."""


class CacheMismatchError(HeulagError):
    """A coefficient cache file does not match the requested configuration."""

    def __init__(self, field: str, expected, found):
        self.field = field
        self.expected = expected
        self.found = found
        super().__init__(
            f"cache mismatch on '{field}': expected {expected!r}, found {found!r}"
        )


class ConditioningWarning(UserWarning):
    """Working precision is below the moments count; results may be degraded."""


class TruncationWarning(UserWarning):
    """Truncation order beyond the range that can improve the result."""
