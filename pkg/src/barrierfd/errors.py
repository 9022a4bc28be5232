"""Exception types raised by the pricing stack."""


class PricingError(Exception):
    """Base class for every error raised by barrierfd."""


class ValidationError(PricingError, ValueError):
    """Contract or market data failed validation."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


class DomainError(PricingError, ValueError):
    """Inputs lie outside the domain of a formula."""


class NumericalError(PricingError, ArithmeticError):
    """A numerical procedure failed (singular pivot, series did not converge)."""


class GeometryError(PricingError, ValueError):
    """Grid construction could not satisfy its placement requirements."""


class AdmissibilityError(GeometryError):
    """Mesh ratio incompatible with the requested theta policy."""


class StabilityError(NumericalError):
    """An explicit scheme was set up with negative transition weights."""
