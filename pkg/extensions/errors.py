from typing import Optional

import numpy as np


class HamflowError(Exception):
    """Base class for every error raised by hamflow."""


class ConfigError(HamflowError):
    def __init__(
        self, message: str, field: Optional[str] = None, line: Optional[int] = None
    ) -> None:
        self.field = field
        self.line = line
        location = ""
        if field:
            location = f"{field}: "
        if line is not None:
            location = f"line {line}: {location}"
        super().__init__(f"{location}{message}")


# Input and structure errors


class UnknownExample(HamflowError, ValueError):
    pass


class BadPartition(HamflowError, ValueError):
    pass


class BadStructure(HamflowError, ValueError):
    pass


class NonPSDHessian(HamflowError, ValueError):
    pass


class SingularG(HamflowError, ValueError):
    pass


class InsufficientSamples(HamflowError, ValueError):
    pass


class OutOfDomain(HamflowError, ValueError):
    pass


# Linear algebra


class NotStabilizable(HamflowError):
    pass


class NotDetectable(HamflowError):
    pass


class IllConditionedSubspace(HamflowError):
    pass


class NotHurwitz(HamflowError):
    pass


class IndefiniteSolution(HamflowError):
    pass


# Integration


class IntegrationError(HamflowError):
    def __init__(self, message: str, t: Optional[float] = None) -> None:
        self.t = t
        super().__init__(message)


class StepSizeUnderflow(IntegrationError):
    """Step size collapsed or the state escaped; signals finite escape."""


class NonFiniteState(IntegrationError):
    pass


# Iterations


class NoConvergence(HamflowError):
    def __init__(self, message: str, residuals=None) -> None:
        self.residuals = list(residuals or [])
        super().__init__(message)


class ShootingDiverged(HamflowError):
    def __init__(
        self, message: str, best_residual: float = np.inf, best_iterate=None
    ) -> None:
        self.best_residual = best_residual
        self.best_iterate = best_iterate
        super().__init__(message)


class IntegratorEscape(HamflowError):
    pass


class Uncovered(HamflowError):
    pass
