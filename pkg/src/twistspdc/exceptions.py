"""Exception types raised by the library."""


class InvalidCovarianceMatrix(ValueError):
    """Input is not a valid covariance matrix (shape, symmetry, diagonal)."""


class WrongDimension(InvalidCovarianceMatrix):
    """Covariance matrix has the wrong number of modes for the operation."""


class NotPositiveDefinite(ValueError):
    """Covariance matrix has a non-positive eigenvalue."""


class PairingDefect(ArithmeticError):
    """Eigenvalues of Omega @ V did not come out as +/- i nu pairs."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceFailure(ArithmeticError):
    """A numerical factorization missed its residual target."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvalidParams(ValueError):
    """Physical parameters outside their allowed domain."""


class TwistBoundViolation(InvalidParams):
    """|u| exceeds 1 / (k delta^2)."""


class OutOfRange(InvalidParams):
    """A normalized parameter lies outside its interval."""


class InfeasibleWaist(ValueError):
    """The symmetric-waist remainder is not positive semidefinite."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
