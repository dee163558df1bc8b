"""Exception types shared across the package."""


class PrivformError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PrivformError):
    """A config file, graph file, or CLI argument is malformed."""


class UnstableGammaError(PrivformError):
    """The step size violates the stability precondition for the update."""


class DisconnectedGraphError(PrivformError):
    """An operation that requires algebraic connectivity got lambda2 <= 0."""


class EigensolverError(PrivformError):
    """The Jacobi eigensolver did not reach its off-diagonal threshold."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (off-diagonal residual {residual:.3e})")
        self.residual = residual


class ConvergenceError(PrivformError):
    """An iterative solver exhausted its budget before reaching tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
