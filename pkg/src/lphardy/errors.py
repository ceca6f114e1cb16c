"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LpHardyError(Exception):
    """Base class for library errors."""


class DimensionMismatch(LpHardyError, ValueError):
    pass


class PoleProximity(LpHardyError, ArithmeticError):
    """A denominator factor is (numerically) zero at the evaluation point."""

    def __init__(self, var_index: int, distance: float, message: str | None = None):
        self.var_index = var_index
        self.distance = distance
        super().__init__(
            message
            or f"evaluation point within {distance:.3g} of a pole in variable {var_index}"
        )


class NonConvergence(LpHardyError):
    """Root finding did not reach the residual tolerance; ``partial`` holds the best roots."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DivergentIntegral(LpHardyError):
    pass


class ToleranceNotMet(LpHardyError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DegeneratePhase(LpHardyError, ValueError):
    pass


class PhaseSearchFailed(LpHardyError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class IllConditionedFit(LpHardyError):
    pass


class DistinctnessViolation(LpHardyError, ValueError):
    pass


class IntegrabilityViolation(LpHardyError, ValueError):
    pass


class SchemaError(LpHardyError, ValueError):
    """Input document failed validation; ``pointer`` is a JSON pointer to the bad field."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
