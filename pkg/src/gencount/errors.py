"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class NonConvergence(ArithmeticError):
    """A series or refinement loop hit its budget before meeting tolerance."""


class StabilityError(ArithmeticError):
    """Requested evaluation lies outside the numerically stable domain."""


class RejectionBudgetExceeded(RuntimeError):
    """A rejection sampler exceeded its proposal budget."""


class BudgetExceeded(RuntimeError):
    """A grid-stepping simulation exceeded its step budget."""


class DegenerateColumn(ValueError):
    """A sample column has zero variance; correlation is undefined."""


class Unsupported(ValueError):
    """The requested (method, parameter) combination has no implementation."""


class TruncationWarning(UserWarning):
    """A truncated series' tail bound was not met at the requested cutoff."""
