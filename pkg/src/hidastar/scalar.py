"""Coefficient field for Fock series.

Two modes are supported.  EXACT coefficients are Gaussian rationals: a real
value is a :class:`gmpy2.mpq`, a value with nonzero imaginary part is a
:class:`GaussianRational`.  FLOAT coefficients are Python ``complex``.
"""

from __future__ import annotations

import enum
import numbers
from fractions import Fraction

from gmpy2 import mpq

__all__ = [
    "Mode",
    "ModeError",
    "GaussianRational",
    "DEFAULT_EPS",
    "exact",
    "to_mode",
    "infer_mode",
    "is_zero",
    "format_part",
    "parse_part",
    "real_imag",
]

DEFAULT_EPS = 1e-10


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class ModeError(TypeError):
    """Raised when EXACT and FLOAT scalars are combined."""


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts.

    Instances are only created for nonzero imaginary part; arithmetic that
    lands on the real axis returns a plain ``mpq``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def make(re, im):
        im = mpq(im)
        if im == 0:
            return mpq(re)
        return GaussianRational(re, im)

    @staticmethod
    def _parts(other):
        if isinstance(other, GaussianRational):
            return other.re, other.im
        if isinstance(other, (int, Fraction)) or type(other) is type(mpq(0)):
            return mpq(other), mpq(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussianRational.make(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussianRational.make(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussianRational.make(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        return GaussianRational.make(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        d = a * a + b * b
        return GaussianRational.make((self.re * a + self.im * b) / d, (self.im * a - self.re * b) / d)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussianRational(p[0], p[1]) / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = mpq(1)
        base = self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __abs__(self):
        return abs(complex(self))

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


_MPQ = type(mpq(0))


def exact(value):
    """Coerce an int, Fraction, ``"p/q"`` string or Gaussian rational to EXACT."""
    if isinstance(value, GaussianRational) or type(value) is _MPQ:
        return value
    if isinstance(value, str):
        return mpq(value.replace("−", "-").strip())
    if isinstance(value, (int, Fraction)):
        return mpq(value)
    if isinstance(value, numbers.Rational):
        return mpq(value.numerator, value.denominator)
    raise ModeError(f"cannot represent {value!r} exactly")


def infer_mode(value) -> Mode | None:
    """Mode implied by a raw scalar; ``None`` for mode-neutral integers."""
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        return None
    if isinstance(value, (float, complex)):
        return Mode.FLOAT
    return Mode.EXACT


def to_mode(value, mode: Mode):
    if mode is Mode.EXACT:
        if isinstance(value, (float, complex)):
            raise ModeError(f"float value {value!r} in EXACT series")
        return exact(value)
    if isinstance(value, GaussianRational):
        return complex(value)
    return complex(value)


def is_zero(value, mode: Mode, eps: float = DEFAULT_EPS) -> bool:
    if mode is Mode.EXACT:
        return value == 0
    return abs(value) <= eps


def real_imag(value) -> tuple:
    if isinstance(value, GaussianRational):
        return value.re, value.im
    if isinstance(value, complex):
        return value.real, value.imag
    return value, 0


def format_part(value, mode: Mode) -> str:
    if mode is Mode.EXACT:
        return str(mpq(value))
    return repr(float(value))


def parse_part(text, mode: Mode):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise ValueError(f"scalar part must be a string, got {text!r}")
    text = text.replace("−", "-").strip()
    if mode is Mode.EXACT:
        try:
            return mpq(text)
        except ValueError:
            raise ValueError(f"not a rational: {text!r}") from None
    try:
        return float(text)
    except ValueError:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        raise ValueError(f"not a float: {text!r}") from None
