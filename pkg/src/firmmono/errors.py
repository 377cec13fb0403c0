"""Exception hierarchy shared by every module."""


class FirmmonoError(Exception):
    """Base class for errors raised by firmmono."""


class DimensionError(FirmmonoError, ValueError):
    """Vectors, matrices or operators with incompatible dimensions."""


class SingularMatrixError(FirmmonoError, ArithmeticError):
    """A linear system is singular or too ill-conditioned to solve."""

    def __init__(self, message, condition):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class ConvergenceError(FirmmonoError, ArithmeticError):
    """An iterative routine stopped at its cap without meeting its tolerance."""

    def __init__(self, message, residual, iterations):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class MonotonicityError(FirmmonoError, ValueError):
    """A linear part M fails the monotonicity requirement M + M^T >= 0."""

    def __init__(self, eigenvalue):
        super().__init__(
            f"operator is not monotone: M + M^T has eigenvalue {eigenvalue:.6g} < 0"
        )
        self.eigenvalue = eigenvalue
