"""Exact rational scalars and intervals.

Every quantity in the engine is a :class:`fractions.Fraction`; intervals carry
an explicit endpoint kind so that boundary contact is decided exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[int, Fraction, str]

CLOSED = "closed"
HALF_OPEN = "half_open_right"

DISJOINT = "disjoint"
INTERSECTS = "intersects"
CONTAINS = "contains"


def make_rational(num: int, den: int = 1) -> Fraction:
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {num}/{den}")
    return Fraction(num, den)


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings; floats are refused."""
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an int, Fraction or 'num/den'")
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return make_rational(int(num), int(den))
        return Fraction(int(text))
    return Fraction(value)


def format_rational(x: Fraction) -> str:
    """Canonical ``num/den`` text, denominator always written."""
    return f"{x.numerator}/{x.denominator}"


def frac_part(x: RationalLike) -> Fraction:
    x = as_rational(x)
    return x - math.floor(x)


@dataclass(frozen=True)
class Interval:
    left: Fraction
    right: Fraction
    kind: str = CLOSED

    def __post_init__(self):
        object.__setattr__(self, "left", as_rational(self.left))
        object.__setattr__(self, "right", as_rational(self.right))
        if self.kind not in (CLOSED, HALF_OPEN):
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if self.left > self.right:
            raise ValueError(f"left endpoint {self.left} exceeds right endpoint {self.right}")
        if self.kind == HALF_OPEN and self.left == self.right:
            raise ValueError("half-open interval must have positive length")

    @classmethod
    def closed(cls, left: RationalLike, right: RationalLike) -> "Interval":
        return cls(as_rational(left), as_rational(right), CLOSED)

    @classmethod
    def half_open(cls, left: RationalLike, right: RationalLike) -> "Interval":
        return cls(as_rational(left), as_rational(right), HALF_OPEN)

    @classmethod
    def around(cls, center: Fraction, radius: Fraction) -> "Interval":
        return cls(center - radius, center + radius, CLOSED)

    @property
    def is_closed(self) -> bool:
        return self.kind == CLOSED

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def radius(self) -> Fraction:
        return self.length / 2

    @property
    def center(self) -> Fraction:
        return (self.left + self.right) / 2

    def __contains__(self, x) -> bool:
        x = as_rational(x)
        if x < self.left:
            return False
        return x <= self.right if self.kind == CLOSED else x < self.right

    def intersects(self, other: "Interval") -> bool:
        lo = max(self.left, other.left)
        hi = min(self.right, other.right)
        if lo < hi:
            return True
        return lo == hi and lo in self and lo in other

    def contains(self, other: "Interval") -> bool:
        """True when ``other`` is a subset of ``self``."""
        if other.left < self.left or other.right > self.right:
            return False
        if other.right == self.right and self.kind == HALF_OPEN:
            return other.kind == HALF_OPEN
        return True

    def __str__(self) -> str:
        close = "]" if self.kind == CLOSED else ")"
        return f"[{format_rational(self.left)}, {format_rational(self.right)}{close}"


def interval_relate(a: Interval, b: Interval) -> str:
    """Relation of ``a`` to ``b``: ``contains`` only when ``b`` is a subset of ``a``."""
    if not a.intersects(b):
        return DISJOINT
    if a.contains(b):
        return CONTAINS
    return INTERSECTS


def interval_distance(a: Interval, b: Interval) -> Fraction:
    """Gap between two intervals, taken as zero when they touch or overlap."""
    if b.left < a.left:
        a, b = b, a
    return max(Fraction(0), b.left - a.right)
