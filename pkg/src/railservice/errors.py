"""Exception hierarchy.

CLI exit codes key off these classes: validation problems map to 2,
infeasible requirements to 3, numerical non-convergence to 4.
"""


class RailServiceError(Exception):
    """Base class for all package errors."""


class DomainError(RailServiceError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(RailServiceError, ValueError):
    """Malformed input data or configuration.

    ``path`` names the offending field (dotted) when one applies.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class FitError(ValidationError):
    """A least-squares line cannot be fitted to the given points."""


class ConvergenceError(RailServiceError, ArithmeticError):
    """Adaptive quadrature hit its depth limit.

    ``partial`` holds the estimate assembled so far, ``error_estimate`` its
    accumulated local error estimate.
    """

    def __init__(self, message: str, partial: float, error_estimate: float):
        self.partial = partial
        self.error_estimate = error_estimate
        super().__init__(message)


class TruncationError(RailServiceError):
    """The capacity truncation rule is not valid for this geometry."""


class InfeasibleRequirementError(RailServiceError):
    """A service requirement cannot be met; ``bound`` is the best achievable."""

    def __init__(self, message: str, bound: float | None = None):
        self.bound = bound
        super().__init__(message)


class UnreachableRatioError(InfeasibleRequirementError):
    """Requested service ratio exceeds what the truncated support can deliver."""


class NoRootError(RailServiceError):
    """No sign change of the target function was found inside the bracket."""
