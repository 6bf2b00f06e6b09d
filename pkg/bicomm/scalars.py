from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

from .errors import MalformedInputError, NonReducibleError

Rational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse `3`, `-2`, `1/4` into a Fraction. Decimal points are rejected."""
    m = _RATIONAL_RE.match(str(text))
    if not m:
        raise MalformedInputError(f"Not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise MalformedInputError(f"Zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(r: Fraction | int) -> str:
    r = Fraction(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True, slots=True)
class FpElem:
    """Element of the prime field F_p."""

    value: int
    p: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.p:
            object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other: Any) -> "FpElem | None":
        if isinstance(other, FpElem):
            if other.p != self.p:
                raise ValueError(f"Cannot mix F_{self.p} and F_{other.p}")
            return other
        if isinstance(other, int):
            return FpElem(other % self.p, self.p)
        if isinstance(other, Fraction):
            return mod_p_reduce(other, self.p)
        return None

    def __add__(self, other: Any) -> "FpElem":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FpElem((self.value + o.value) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "FpElem":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FpElem((self.value - o.value) % self.p, self.p)

    def __rsub__(self, other: Any) -> "FpElem":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FpElem((o.value - self.value) % self.p, self.p)

    def __mul__(self, other: Any) -> "FpElem":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FpElem((self.value * o.value) % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "FpElem":
        return FpElem((-self.value) % self.p, self.p)

    def inverse(self) -> "FpElem":
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.p}")
        return FpElem(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other: Any) -> "FpElem":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: Any) -> "FpElem":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int) -> "FpElem":
        if k < 0:
            return self.inverse() ** (-k)
        return FpElem(pow(self.value, k, self.p), self.p)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FpElem):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        if isinstance(other, Fraction):
            if other.denominator % self.p == 0:
                return False
            return self.value == mod_p_reduce(other, self.p).value
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.p))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.p})"

    def lift(self) -> Fraction:
        """Symmetric integer lift in (-p/2, p/2]."""
        v = self.value
        if v > self.p // 2:
            v -= self.p
        return Fraction(v)


Scalar = Union[Fraction, FpElem]


def mod_p_reduce(r: Fraction | int, p: int) -> FpElem:
    r = Fraction(r)
    if r.denominator % p == 0:
        raise NonReducibleError(f"{format_rational(r)} is not reducible mod {p}: denominator divisible by {p}")
    inv = pow(r.denominator % p, p - 2, p)
    return FpElem((r.numerator % p) * inv % p, p)


def one_like(x: Any) -> Scalar:
    if isinstance(x, FpElem):
        return FpElem(1, x.p)
    return Fraction(1)


def zero_like(x: Any) -> Scalar:
    if isinstance(x, FpElem):
        return FpElem(0, x.p)
    return Fraction(0)


def field_unit(p: int | None) -> Scalar:
    """The multiplicative identity of Q (p is None) or F_p."""
    return Fraction(1) if p is None else FpElem(1, p)


def is_zero(x: Any) -> bool:
    return x == 0
