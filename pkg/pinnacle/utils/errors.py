class PinnacleError(Exception):
    """Base class for every failure the command line maps to an exit code"""
    exit_code = 1


class ConfigError(PinnacleError, ValueError):
    exit_code = 2


class DomainError(PinnacleError, ValueError):
    """Argument outside the domain where an operation is defined"""
    exit_code = 2


class AdmissibilityError(DomainError):
    """Configuration or move violating the |grad| <= 1 restriction"""

    def __init__(self, message: str, bond: tuple | None = None):
        super().__init__(message)
        self.bond = bond


class ValidityError(DomainError):
    """Structurally invalid input (contour family, six-vertex grid, path family, ...)"""


class MisuseError(DomainError):
    pass


class NumericError(PinnacleError, RuntimeError):
    exit_code = 3


class SolverError(NumericError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(SolverError):
    pass


class OrderingViolation(NumericError):
    """Raised when a monotone coupling loses its sitewise ordering"""


class BudgetError(PinnacleError):
    exit_code = 4


class StateSpaceTooLarge(BudgetError):
    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count
