"""Scalar arithmetic in two modes: double-precision complex and exact
complex rationals (real and imaginary parts are ``fractions.Fraction``).

Exact mode is opt-in per computation; a single computation never mixes
modes silently, but ``RationalComplex`` interoperates with Python ints and
``Fraction`` so that generic code can use plain ``+``/``*``.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .errors import SpecParseError

_COERCIBLE = (int, Fraction)


class RationalComplex:
    """A complex number with exact rational real/imaginary parts.

    Closed under +, -, *, / (nonzero divisor).  Hashable and immutable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("RationalComplex is immutable")

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalComplex):
            return other
        if isinstance(other, _COERCIBLE):
            return RationalComplex(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalComplex(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero RationalComplex")
        return RationalComplex(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o.__truediv__(self)

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = RationalComplex(1)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- structure ---------------------------------------------------------

    def conjugate(self) -> "RationalComplex":
        return RationalComplex(self.re, -self.im)

    def abs_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"RationalComplex({self.re})"
        return f"RationalComplex({self.re}, {self.im})"


def is_exact(x) -> bool:
    return isinstance(x, (RationalComplex, Rational))


def conj(x):
    if isinstance(x, (RationalComplex, complex)):
        return x.conjugate()
    return x  # real rationals, ints, floats


def abs_sq(x):
    if isinstance(x, RationalComplex):
        return x.abs_sq()
    if isinstance(x, complex):
        return x.real * x.real + x.imag * x.imag
    return x * x


def to_complex(x) -> complex:
    return complex(x)


# -- serialization ---------------------------------------------------------
#
# Scalars in JSON: a number (floating mode), a decimal string "p/q" (exact
# real), a two-element list [re, im] of numbers, or an object
# {"re": ..., "im": ...} whose parts are numbers or "p/q" strings.

def _parse_part(part, where):
    if isinstance(part, str):
        try:
            return Fraction(part)
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecParseError(f"{where}: bad rational literal {part!r}") from exc
    if isinstance(part, (int, float)):
        return part
    raise SpecParseError(f"{where}: expected number or 'p/q' string, got {part!r}")


def parse_scalar(obj, where="scalar"):
    """Decode a JSON scalar; returns complex, or RationalComplex for exact."""
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, str):
        return RationalComplex(_parse_part(obj, where))
    if isinstance(obj, list) and len(obj) == 2:
        re, im = (_parse_part(p, where) for p in obj)
        if isinstance(re, Fraction) or isinstance(im, Fraction):
            return RationalComplex(Fraction(re), Fraction(im))
        return complex(re, im)
    if isinstance(obj, dict) and set(obj) <= {"re", "im"}:
        re = _parse_part(obj.get("re", 0), where)
        im = _parse_part(obj.get("im", 0), where)
        if isinstance(re, Fraction) or isinstance(im, Fraction):
            return RationalComplex(Fraction(re), Fraction(im))
        return complex(re, im)
    raise SpecParseError(f"{where}: unrecognized scalar {obj!r}")


def scalar_to_json(x):
    if isinstance(x, RationalComplex):
        if x.im == 0:
            return str(x.re)
        return {"re": str(x.re), "im": str(x.im)}
    if isinstance(x, Fraction):
        return str(x)
    z = complex(x)
    if z.imag == 0.0:
        return z.real
    return [z.real, z.imag]
