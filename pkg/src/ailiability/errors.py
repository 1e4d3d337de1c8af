"""Exception hierarchy shared across the engine."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


class ConvergenceError(RuntimeError):
    """An iterative method ran out of iterations before meeting its tolerance."""


class DivergenceError(ArithmeticError):
    """A moment or expectation does not exist for the given parameters."""


class ValidationError(ValueError):
    """A model value violates one of its invariants."""


class TrainingError(RuntimeError):
    """SGD training produced a non-finite loss."""


class UtilityOverflowError(OverflowError):
    """Exponential utility overflowed for an extreme argument."""
