"""Exception types raised by sphere-multipliers."""


class SphereMultipliersError(Exception):
    """Base class for all library errors."""


class DomainError(SphereMultipliersError, ValueError):
    """An argument lies outside the domain of the operation."""


class ShapeError(SphereMultipliersError, ValueError):
    """Block lengths, band limits or grid sizes do not match."""


class PositivityError(SphereMultipliersError, ValueError):
    """A kernel coefficient is negative, complex or not finite."""

    def __init__(self, message: str, degree: int | None = None, index: int | None = None):
        super().__init__(message)
        self.degree = degree
        self.index = index


class DimensionOverflowError(SphereMultipliersError, OverflowError):
    """Integer combinatorics left the supported range."""


class NumericError(SphereMultipliersError, ArithmeticError):
    """A numerical procedure failed (non-convergence, NaN in an integrand)."""

    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class FitError(SphereMultipliersError):
    """A log-log fit had too few usable points."""

    def __init__(self, message: str, usable: int = 0, excluded: list | None = None):
        super().__init__(message)
        self.usable = usable
        self.excluded = excluded or []


class ConfigError(SphereMultipliersError, ValueError):
    """Configuration could not be parsed or failed validation."""

    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = errors or []
