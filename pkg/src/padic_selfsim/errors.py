"""Exception types shared across the package.

The CLI maps each class onto its own exit code, so raise the most specific one.
"""


class SelfSimError(Exception):
    """Base class for every error raised deliberately by this package."""


class PreconditionError(SelfSimError, ValueError):
    """Input violates an operation's precondition (bad prime, singular matrix, ...)."""


class PrecisionError(SelfSimError, ArithmeticError):
    """Not enough certified p-adic digits to carry out the computation."""

    def __init__(self, message, required=None, available=None):
        super().__init__(message)
        self.required = required
        self.available = available


class NotInvertibleError(PreconditionError, ArithmeticError):
    """A scalar or matrix is not a unit at the working precision."""


class BudgetError(SelfSimError, RuntimeError):
    """A configured size cap would be exceeded."""


class InvariantViolation(SelfSimError, AssertionError):
    """Internal consistency check failed; indicates a bug, not bad input."""
