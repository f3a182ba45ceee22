"""Exception types shared across the package."""


class MtasepError(Exception):
    """Base class for package errors."""


class EmptyLevel(MtasepError):
    """A cutoff level has no remaining positions to record a maximum from."""


class NotInvertible(MtasepError):
    """Configuration is not a rainbow permutation, so no inverse exists."""


class WindowTooSmall(MtasepError):
    """Requested window violates the truncation policy for the horizon."""


class BudgetInfeasible(MtasepError):
    """Error budget would require more uniformization steps than the cap."""


class NotConverged(MtasepError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NonProbability(MtasepError):
    """A probability formula evaluated outside [-tol, 1+tol]."""


class ArgumentsTooClose(MtasepError):
    """Argument tuple violates the minimum pairwise separation."""
