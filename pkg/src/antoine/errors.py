"""Exception types shared across the package."""


class GeometryError(ValueError):
    """A value violates a geometric type invariant."""


class NonConvergence(RuntimeError):
    """Local refinement did not reach its tolerance."""


class InvalidParams(ValueError):
    pass


class ValidationFailed(RuntimeError):
    """An assembled chain failed :func:`antoine.chains.validate_chain`."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class PreconditionFailed(ValueError):
    pass


class NotFound(RuntimeError):
    pass


class NotSimilar(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class InsufficientData(ValueError):
    pass


class InvariantViolation(AssertionError):
    """A result contradicts a proven inequality; indicates a bug."""
