"""Arithmétique d'intervalles fermés pour l'enveloppe des effets marginaux.

Addition par bornes, multiplication par extremums des produits des bornes.
"""

from __future__ import annotations

from dataclasses import dataclass

from logitmed.core.errors import IntervalError

UNIT = (0.0, 1.0)
SIGNED_UNIT = (-1.0, 1.0)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; a point is an interval with lo == hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        """Reject empty intervals."""
        if not self.lo <= self.hi:
            raise IntervalError(
                f"empty interval [{self.lo}, {self.hi}]", details={"lo": self.lo, "hi": self.hi}
            )

    @classmethod
    def coerce(cls, value: Interval | float | tuple[float, float] | list[float]) -> Interval:
        """Build an interval from a point, a pair or an interval."""
        if isinstance(value, Interval):
            return value
        if isinstance(value, tuple | list):
            lo, hi = value
            return cls(float(lo), float(hi))
        return cls(float(value), float(value))

    @classmethod
    def hull(cls, values: list[float]) -> Interval:
        """Smallest interval containing every value."""
        if not values:
            raise IntervalError("hull of an empty set")
        return cls(min(values), max(values))

    def __add__(self, other: Interval) -> Interval:
        """Add endpoint-wise."""
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __mul__(self, other: Interval) -> Interval:
        """Multiply through the four endpoint products."""
        products = [self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi]
        return Interval(min(products), max(products))

    @property
    def is_point(self) -> bool:
        """Whether the interval is degenerate."""
        return self.lo == self.hi
