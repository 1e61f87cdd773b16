"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition (non-finite, wrong shape...)."""


class NumericalError(ArithmeticError):
    """A numerically ill-posed operation (near-singular inertia matrix)."""


class InvariantViolationError(RuntimeError):
    """A state invariant was breached; usually means the integrator step is too large."""


class HistoryQueryError(ValueError):
    """A delayed-signal query fell outside the covered history window."""


class StaleHistoryError(HistoryQueryError):
    """Bracketing history samples are too far apart for a trustworthy lookup."""


class DivergenceError(RuntimeError):
    """The integrated state became non-finite.

    Carries a diagnostic dump: the last finite state vector and the step
    index at which integration failed.
    """

    def __init__(self, message, t=None, step=None, state=None):
        super().__init__(message)
        self.t = t
        self.step = step
        self.state = state


class GainConditionError(RuntimeError):
    """Scenario refused to start because the damping gain condition fails."""


class ConfigError(ValueError):
    """Scenario configuration could not be parsed or validated."""
