"""Exception types raised across the package."""
from dataclasses import dataclass


class FFAvgError(Exception):
    pass


class NotPrime(FFAvgError, ValueError):
    pass


class EvenCharacteristic(FFAvgError, ValueError):
    pass


class ZeroInverse(FFAvgError, ZeroDivisionError):
    pass


class InvalidExponent(FFAvgError, ValueError):
    pass


class ShapeMismatch(FFAvgError, ValueError):
    pass


class GridTooLarge(FFAvgError, ValueError):
    pass


class ZeroJ(FFAvgError, ValueError):
    pass


class EmptyVariety(FFAvgError, ValueError):
    pass


class BadK(FFAvgError, ValueError):
    pass


class BadKind(FFAvgError, ValueError):
    pass


class ZeroFunction(FFAvgError, ValueError):
    pass


class DegenerateFit(FFAvgError, ValueError):
    pass


class ConfigError(FFAvgError, ValueError):
    pass


class IoError(FFAvgError, OSError):
    pass


@dataclass(frozen=True)
class BoundViolation:
    """A numerical check that exceeded its explicit bound."""

    check: str
    q: int
    d: int
    j: int | None
    value: float
    bound: float

    def as_dict(self):
        return {"check": self.check, "q": self.q, "d": self.d, "j": self.j,
                "value": self.value, "bound": self.bound}


class BoundViolationError(FFAvgError):
    def __init__(self, violation: BoundViolation):
        self.violation = violation
        super().__init__(
            f"{violation.check} violated at q={violation.q}, d={violation.d}, "
            f"j={violation.j}: {violation.value!r} > {violation.bound!r}")
