"""Gaussian rationals: complex numbers with exact rational parts.

Values are immutable. Arithmetic with ``int``/``Fraction`` stays exact;
mixing with a Python ``complex`` falls back to binary64 and returns ``complex``
(that is how the float backend piggybacks on the same polynomial code).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

__all__ = ["GaussianRational", "gr", "I", "ZERO", "ONE", "is_zero", "to_complex"]


def _new(re_: Fraction, im_: Fraction) -> "GaussianRational":
    obj = object.__new__(GaussianRational)
    object.__setattr__(obj, "re", re_)
    object.__setattr__(obj, "im", im_)
    return obj


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re: Rational | int | str = 0, im: Rational | int | str = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return _new(Fraction(value), Fraction(0))
        if isinstance(value, complex):
            raise TypeError("cannot coerce a float complex to an exact Gaussian rational")
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussianRational")

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return _new(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return _new(self.re + other, self.im)
        if isinstance(other, (complex, float)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return _new(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, GaussianRational):
            return _new(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return _new(self.re - other, self.im)
        if isinstance(other, (complex, float)):
            return complex(self) - other
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            return _new(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, Fraction)):
            return _new(self.re * other, self.im * other)
        if isinstance(other, (complex, float)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return _new(self.re / other, self.im / other)
        if isinstance(other, GaussianRational):
            return self * other.inverse()
        if isinstance(other, (complex, float)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        if isinstance(other, (complex, float)):
            return other / complex(self)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return _new(self.re / n, -self.im / n)

    def conjugate(self) -> "GaussianRational":
        return _new(self.re, -self.im)

    def norm(self) -> Fraction:
        """Squared modulus ``re**2 + im**2`` (exact)."""
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    # comparisons / hashing --------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, (complex, float)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def height(self) -> int:
        """Largest absolute numerator or denominator among both parts."""
        return max(abs(self.re.numerator), self.re.denominator,
                   abs(self.im.numerator), self.im.denominator)

    # text -------------------------------------------------------------------

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        im = "" if abs(self.im) == 1 else f"{abs(self.im)}*"
        if self.re == 0:
            return f"{'-' if self.im < 0 else ''}{im}i"
        return f"{self.re}{'-' if self.im < 0 else '+'}{im}i"


_LITERAL = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)?\s*(?:(?P<sign>[+-])\s*(?P<im>\d+(?:/\d+)?)?\s*\*?\s*i)?\s*$"
)


def gr(value=0, im=0) -> GaussianRational:
    """Build a Gaussian rational from numbers or from a literal like ``'3/5-4/5i'``."""
    if isinstance(value, str) and im == 0:
        text = value.replace(" ", "")
        if text in ("i", "+i"):
            return I
        if text == "-i":
            return -I
        if text.endswith("i") and re.fullmatch(r"[+-]?\d+(/\d+)?\*?i", text):
            return _new(Fraction(0), Fraction(text[:-1].rstrip("*")))
        m = _LITERAL.match(text)
        if not m or (m.group("re") is None and m.group("sign") is None):
            raise ValueError(f"not a Gaussian rational literal: {value!r}")
        re_part = Fraction(m.group("re") or 0)
        im_part = Fraction(0)
        if m.group("sign"):
            im_part = Fraction(m.group("im") or 1)
            if m.group("sign") == "-":
                im_part = -im_part
        return _new(re_part, im_part)
    if isinstance(value, GaussianRational) and im == 0:
        return value
    return GaussianRational(value, im)


def is_zero(x, tol: float = 0.0) -> bool:
    """Exact zero test for Gaussian rationals, ``abs(x) <= tol`` for floats."""
    if isinstance(x, GaussianRational):
        return not x
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) <= tol


def to_complex(x) -> complex:
    return complex(x)


def isqrt_fraction(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None if irrational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


ZERO = _new(Fraction(0), Fraction(0))
ONE = _new(Fraction(1), Fraction(0))
I = _new(Fraction(0), Fraction(1))
