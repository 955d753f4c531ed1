"""Scalar conventions: exact rationals, exact complex rationals, float tolerance.

Exact mode uses :class:`fractions.Fraction` everywhere an identity is
asserted.  Float mode carries plain Python floats together with an
absolute tolerance; float values never enter the identity battery.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
import math

__all__ = [
    "CQ",
    "Tolerance",
    "EXACT",
    "FLOAT",
    "to_fraction",
    "parse_rational",
    "format_rational",
    "is_exact",
    "ZERO",
    "ONE",
    "IUNIT",
]


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions and rational strings to a Fraction.

    Floats are rejected: silently rationalising a float would leak
    rounding error into exact computations.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, ``"-3"`` or a decimal string such as ``"0.125"``."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def format_rational(value) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


@dataclass(frozen=True)
class Tolerance:
    """Comparison policy.  ``atol == 0`` means exact equality."""

    atol: float = 0.0

    @property
    def exact(self) -> bool:
        return self.atol == 0.0

    def is_zero(self, value) -> bool:
        if self.exact:
            return value == 0
        return abs(value) <= self.atol

    def sign(self, value) -> int:
        if self.is_zero(value):
            return 0
        return 1 if value > 0 else -1


EXACT = Tolerance(0.0)
FLOAT = Tolerance(1e-9)


class CQ:
    """Exact complex rational ``re + im*sqrt(-1)`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "CQ":
        if isinstance(value, CQ):
            return value
        if isinstance(value, complex):
            raise TypeError("floating complex numbers are not exact")
        return cls(to_fraction(value), 0)

    # arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, CQ):
            other = CQ.coerce(other)
        return CQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, CQ):
            other = CQ.coerce(other)
        return CQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return CQ.coerce(other) - self

    def __neg__(self):
        return CQ(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, CQ):
            if isinstance(other, (int, Fraction)):
                return CQ(self.re * other, self.im * other)
            other = CQ.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        return CQ(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, CQ):
            other = CQ.coerce(other)
        den = other.re * other.re + other.im * other.im
        if den == 0:
            raise ZeroDivisionError("complex division by zero")
        return self * CQ(other.re / den, -other.im / den)

    def __rtruediv__(self, other):
        return CQ.coerce(other) / self

    def conjugate(self) -> "CQ":
        return CQ(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # predicates -----------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, CQ):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"CQ({format_rational(self.re)}, {format_rational(self.im)})"

    def __str__(self):
        if self.im == 0:
            return format_rational(self.re)
        if self.re == 0:
            return _imag_str(self.im)
        sign = "-" if self.im < 0 else "+"
        return f"({format_rational(self.re)}{sign}{_imag_str(abs(self.im))})"


def _imag_str(value: Fraction) -> str:
    if value == 1:
        return "i"
    if value == -1:
        return "-i"
    if value.denominator != 1:
        return f"{format_rational(value)}*i"
    return f"{format_rational(value)}i"


ZERO = CQ(0, 0)
ONE = CQ(1, 0)
IUNIT = CQ(0, 1)


def isclose(a, b, atol: float) -> bool:
    return math.isclose(float(a), float(b), rel_tol=0.0, abs_tol=atol)
