from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, Iterable, Mapping, Sequence, Tuple

from .errors import MalformedInputError
from .scalars import format_rational

Monomial = Tuple[int, ...]


class MultiPoly:
    """Sparse multivariate polynomial with Fraction coefficients.

    `variables` fixes the meaning of each exponent slot. Two polynomials over
    different variable tuples are embedded into the union (left operand's
    order first) before arithmetic, so equality does not depend on how the
    variables were declared.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str] = (), terms: Mapping[Monomial, Any] | None = None) -> None:
        self.variables: Tuple[str, ...] = tuple(variables)
        clean: Dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            c = Fraction(coeff)
            if c != 0:
                if len(mono) != len(self.variables):
                    raise MalformedInputError(
                        f"Exponent vector {mono} does not match variables {self.variables}"
                    )
                clean[tuple(mono)] = c
        self.terms: Dict[Monomial, Fraction] = clean
        self._hash: int | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, c: Any, variables: Sequence[str] = ()) -> "MultiPoly":
        return cls(variables, {(0,) * len(variables): Fraction(c)})

    @classmethod
    def variable(cls, name: str, variables: Sequence[str] | None = None) -> "MultiPoly":
        vs = tuple(variables) if variables is not None else (name,)
        if name not in vs:
            vs = vs + (name,)
        mono = tuple(1 if v == name else 0 for v in vs)
        return cls(vs, {mono: Fraction(1)})

    # -- helpers ------------------------------------------------------------

    def _reembed(self, variables: Tuple[str, ...]) -> Dict[Monomial, Fraction]:
        if variables == self.variables:
            return self.terms
        index = [variables.index(v) for v in self.variables]
        out: Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            e = [0] * len(variables)
            for slot, power in zip(index, mono):
                e[slot] = power
            out[tuple(e)] = c
        return out

    def _align(self, other: "MultiPoly") -> Tuple[Tuple[str, ...], Dict[Monomial, Fraction], Dict[Monomial, Fraction]]:
        if other.variables == self.variables:
            return self.variables, self.terms, other.terms
        merged = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return merged, self._reembed(merged), other._reembed(merged)

    @staticmethod
    def _lift(x: Any) -> "MultiPoly | None":
        if isinstance(x, MultiPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return MultiPoly.constant(x)
        return None

    # -- queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def used_variables(self) -> Tuple[str, ...]:
        used = set()
        for mono in self.terms:
            for v, power in zip(self.variables, mono):
                if power:
                    used.add(v)
        return tuple(v for v in self.variables if v in used)

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def canonical(self) -> frozenset:
        """Variable-order independent key: {((name, power), ...): coeff}."""
        items = []
        for mono, c in self.terms.items():
            named = tuple(sorted((v, p) for v, p in zip(self.variables, mono) if p))
            items.append((named, c))
        return frozenset(items)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: Any) -> "MultiPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        vs, a, b = self._align(o)
        out = dict(a)
        for mono, c in b.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return MultiPoly(vs, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Any) -> "MultiPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Any) -> "MultiPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other: Any) -> "MultiPoly":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return MultiPoly(self.variables)
            return MultiPoly(self.variables, {m: c * other for m, c in self.terms.items()})
        o = self._lift(other)
        if o is None:
            return NotImplemented
        vs, a, b = self._align(o)
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                mono = tuple(x + y for x, y in zip(m1, m2))
                s = out.get(mono, 0) + c1 * c2
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return MultiPoly(vs, out)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "MultiPoly":
        # Only division by a nonzero constant: polynomial division is not offered.
        if isinstance(other, MultiPoly):
            if not other.is_constant() or other.is_zero():
                raise MalformedInputError(f"Cannot divide by non-constant polynomial {other}")
            other = other.constant_value()
        other = Fraction(other)
        if other == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / other)

    def __pow__(self, k: int) -> "MultiPoly":
        if not isinstance(k, int) or k < 0:
            raise MalformedInputError(f"Exponent must be a nonnegative integer, got {k!r}")
        result = MultiPoly.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.terms
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, MultiPoly):
            return NotImplemented
        _, a, b = self._align(other)
        return a == b

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.canonical())
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- rendering ----------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (-sum(m), tuple(-x for x in m))):
            c = self.terms[mono]
            factors = []
            for v, p in zip(self.variables, mono):
                if p == 1:
                    factors.append(v)
                elif p > 1:
                    factors.append(f"{v}^{p}")
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                text = format_rational(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{format_rational(mag)}*{body}"
            parts.append(("-" if c < 0 else "+", text))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out

    def __repr__(self) -> str:
        return f"MultiPoly({self})"


def poly_normalize(raw_terms: Iterable[Tuple[Sequence[int], Any]], variables: Sequence[str]) -> MultiPoly:
    """Sum coefficients of equal exponent vectors and drop zeros."""
    width = len(tuple(variables))
    acc: Dict[Monomial, Fraction] = {}
    for mono, coeff in raw_terms:
        mono = tuple(int(e) for e in mono)
        if len(mono) != width:
            raise MalformedInputError(f"Exponent vector {mono} has length {len(mono)}, expected {width}")
        acc[mono] = acc.get(mono, Fraction(0)) + Fraction(coeff)
    return MultiPoly(variables, acc)


def poly_substitute(p: MultiPoly, bindings: Mapping[str, Any]) -> MultiPoly | Fraction:
    """Eliminate every bound variable. A full binding yields a Fraction."""
    if not isinstance(p, MultiPoly):
        return Fraction(p)
    keep = tuple(v for v in p.variables if v not in bindings)
    keep_index = [p.variables.index(v) for v in keep]
    bound = [(i, Fraction(bindings[v])) for i, v in enumerate(p.variables) if v in bindings]
    out: Dict[Monomial, Fraction] = {}
    for mono, c in p.terms.items():
        val = c
        for i, value in bound:
            if mono[i]:
                val *= value ** mono[i]
        if val == 0:
            continue
        key = tuple(mono[i] for i in keep_index)
        out[key] = out.get(key, Fraction(0)) + val
    result = MultiPoly(keep, out)
    if not keep:
        return result.constant_value() if result.terms else Fraction(0)
    return result


def substitute_scalar(x: Any, bindings: Mapping[str, Any]) -> Any:
    """poly_substitute for mixed tensors: Fractions pass through, constants collapse."""
    if isinstance(x, MultiPoly):
        out = poly_substitute(x, bindings)
        if isinstance(out, MultiPoly) and out.is_constant():
            return out.constant_value()
        return out
    return x


def as_poly(x: Any, variables: Sequence[str] = ()) -> MultiPoly:
    if isinstance(x, MultiPoly):
        return x
    return MultiPoly.constant(x, variables)
