class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NotAStateError(ValueError):
    """Matrix fails the density-operator invariants."""


class TruncationError(ArithmeticError):
    """Fock cutoff too small for the requested accuracy."""


class AccuracyError(ArithmeticError):
    """A quadrature or refinement loop did not reach its tolerance."""


class PreconditionError(ValueError):
    pass


class ShapeError(ValueError):
    pass
