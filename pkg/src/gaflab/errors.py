"""Exception types shared across the package.

Exit-code mapping used by the CLI: ParameterError and its subclasses
map to exit code 2, ConvergenceError / ContourError / CoverageError
map to exit code 3.
"""


class GafLabError(Exception):
    """Base class for all package errors."""


class DomainError(GafLabError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ParameterError(GafLabError, ValueError):
    """Parameters are structurally invalid (bad ranges, inconsistent sizes)."""


class SingularParameterError(ParameterError):
    """The parameter sits exactly at an excluded singular value (p = 1)."""


class EmptyBulkError(ParameterError):
    """Constraint level so large that the bulk of the measure would vanish."""


class UnsupportedRegimeError(ParameterError):
    """Requested object is only defined on a smaller parameter range."""


class DegenerateDegreeError(GafLabError):
    """Leading polynomial coefficient underflowed; degree had to be reduced."""

    def __init__(self, message, effective_degree=None):
        super().__init__(message)
        self.effective_degree = effective_degree


class ContourError(GafLabError):
    """A zero persistently sits on the counting contour."""


class CoverageError(GafLabError):
    """A statistic would silently miss zeros outside the searched region."""


class ConvergenceError(GafLabError):
    """Iterative solver failed to reach its tolerance."""
