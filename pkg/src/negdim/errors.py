"""Exception types shared across the package."""


class NegdimError(Exception):
    """Base class for all package errors."""


class DomainError(NegdimError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(NegdimError):
    """A value object violates its structural invariants."""


class ConvergenceError(NegdimError):
    """An iterative solver failed to reach its tolerance.

    Attributes carry the diagnostic state so callers can report brackets
    and residuals instead of a bare failure.
    """

    def __init__(self, message, *, bracket=None, residual=None):
        super().__init__(message)
        self.bracket = bracket
        self.residual = residual


class CalibrationError(NegdimError):
    """Two-point calibration has no solution for the supplied data.

    `achievable` holds the (low, high) range of model point ratios that
    the requested configuration can produce; `requested` is the data ratio.
    """

    def __init__(self, message, *, achievable=None, requested=None):
        super().__init__(message)
        self.achievable = achievable
        self.requested = requested


class BudgetExceededError(NegdimError):
    """An exact table grew past its configured size cap.

    The caller must shrink the instance or raise the budget explicitly.
    """

    def __init__(self, message, *, states=None, budget=None):
        super().__init__(message)
        self.states = states
        self.budget = budget
