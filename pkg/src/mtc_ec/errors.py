"""Exception types shared across the package."""


class EcError(Exception):
    """Base class for every error raised by mtc_ec."""


class DomainError(EcError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(EcError, ArithmeticError):
    """A numerical routine failed to reach its tolerance.

    ``estimate`` and ``error_bound`` carry the best result found so far,
    ``bracket`` the final search interval where that makes sense.
    """

    def __init__(self, message, estimate=None, error_bound=None, bracket=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
        self.bracket = bracket


class BracketError(NumericError):
    """The supplied interval does not bracket a root."""


class InfeasibleError(EcError):
    """A compensation target cannot be met within the search limits."""
