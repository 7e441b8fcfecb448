"""Exact Gaussian rationals ``a + b i`` with rational ``a`` and ``b``."""

from __future__ import annotations

from fractions import Fraction


class GaussQ:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussQ":
        if isinstance(value, GaussQ):
            return value
        if isinstance(value, complex):
            raise TypeError("floating complex numbers are not exact; use GaussQ")
        if isinstance(value, float):
            raise TypeError("floats are not exact; use Fraction")
        return cls(value)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if not isinstance(other, GaussQ):
            try:
                other = GaussQ.coerce(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        other = GaussQ.coerce(other)
        return GaussQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussQ.coerce(other)
        return GaussQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussQ.coerce(other) - self

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __mul__(self, other):
        other = GaussQ.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussQ(a * c)
        return GaussQ(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussQ.coerce(other)
        n = other.re * other.re + other.im * other.im
        if not n:
            raise ZeroDivisionError("division by zero")
        return self * GaussQ(other.re / n, -other.im / n)

    def __rtruediv__(self, other):
        return GaussQ.coerce(other) / self

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*i)"


ZERO = GaussQ(0)
ONE = GaussQ(1)
I = GaussQ(0, 1)
