"""Exception types shared across the package."""


class AlgebraMismatchError(ValueError):
    """Operands live over different dimensions or deformation matrices."""


class InversionError(ArithmeticError):
    """Fixed-point inversion failed to reach the requested residual.

    Carries the best residual achieved so callers can report it.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PrincipalSymbolError(ValueError):
    """Operator does not satisfy the structural preconditions for a parametrix."""
