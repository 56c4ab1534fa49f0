"""Exception hierarchy.

Two families matter downstream: RegimeError and its children mean the
requested quantity is statistically undefined for the given dimensions or
degenerate inputs (CLI exit code 2); DomainError and DataFormatError mean the
caller passed something malformed (CLI exit code 1).
"""


class MvlrtError(Exception):
    """Base class for all library errors."""


class DomainError(MvlrtError, ValueError):
    """Argument outside an operation's domain (bad alpha, shape mismatch, ...)."""


class RegimeError(MvlrtError):
    """Statistic undefined in this dimension regime (e.g. n <= p + m)."""


class SingularDesignError(RegimeError):
    """Design matrix numerically rank deficient."""


class HypothesisRankError(RegimeError):
    """Hypothesis matrix C does not have full row rank."""


class DegenerateMatrixError(RegimeError):
    """A matrix required to be positive definite is not (Cholesky failed)."""


class DegenerateRootError(RegimeError):
    """Largest-root statistic undefined because theta is exactly 0 or 1."""


class SplitInfeasibleError(RegimeError):
    """A data split leaves too few rows for the reduced test dimensions."""


class DataFormatError(MvlrtError, ValueError):
    """Malformed CSV or config input."""
