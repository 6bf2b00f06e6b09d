from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Sequence, Tuple

from .errors import DslSyntaxError, IrrationalValueError, MalformedInputError, UnknownSymbolError
from .poly import MultiPoly

# Arithmetic expressions shared by coefficient fields, automorphism entries
# and action formulas: + - * / ^ (or **), parentheses, juxtaposition as
# multiplication ("2x", "x(y+z)", "alpha e3"), and sqrt(...).

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^(),]))")


@dataclass(frozen=True)
class Token:
    kind: str  # NUM | ID | OP | END
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise DslSyntaxError(f"Unexpected character {text[pos]!r}", column=pos + 1)
        num, ident, op = m.groups()
        start = m.start(m.lastindex) if m.lastindex else pos
        if num is not None:
            tokens.append(Token("NUM", num, start))
        elif ident is not None:
            tokens.append(Token("ID", ident, start))
        else:
            tokens.append(Token("OP", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(Token("END", "", n))
    return tokens


# AST: ("num", Fraction) | ("var", name) | ("neg", a) | ("add", a, b) | ("sub", a, b)
#      | ("mul", a, b) | ("div", a, b) | ("pow", a, k) | ("call", name, a)
Node = Tuple[Any, ...]


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, op: str) -> None:
        t = self.take()
        if t.kind != "OP" or t.text != op:
            raise DslSyntaxError(f"Expected {op!r} in {self.text!r}", column=t.pos + 1)

    def parse(self) -> Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "END":
            raise DslSyntaxError(f"Unexpected {t.text!r} in {self.text!r}", column=t.pos + 1)
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text in "+-":
                self.take()
                rhs = self.term()
                node = ("add" if t.text == "+" else "sub", node, rhs)
            else:
                return node

    def _starts_primary(self, t: Token) -> bool:
        return t.kind in ("NUM", "ID") or (t.kind == "OP" and t.text == "(")

    def term(self) -> Node:
        node = self.unary()
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text in "*/":
                self.take()
                rhs = self.unary()
                node = ("mul" if t.text == "*" else "div", node, rhs)
            elif self._starts_primary(t):
                node = ("mul", node, self.power())
            else:
                return node

    def unary(self) -> Node:
        t = self.peek()
        if t.kind == "OP" and t.text in "+-":
            self.take()
            inner = self.unary()
            return ("neg", inner) if t.text == "-" else inner
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        t = self.peek()
        if t.kind == "OP" and t.text == "^":
            self.take()
            sign = 1
            nt = self.peek()
            if nt.kind == "OP" and nt.text == "-":
                self.take()
                sign = -1
            e = self.take()
            if e.kind != "NUM":
                raise DslSyntaxError(f"Exponent must be an integer in {self.text!r}", column=e.pos + 1)
            return ("pow", base, sign * int(e.text))
        return base

    def primary(self) -> Node:
        t = self.take()
        if t.kind == "NUM":
            return ("num", Fraction(int(t.text)))
        if t.kind == "ID":
            nt = self.peek()
            if nt.kind == "OP" and nt.text == "(" and t.text in _FUNCTIONS:
                self.take()
                arg = self.expr()
                self.expect(")")
                return ("call", t.text, arg)
            return ("var", t.text)
        if t.kind == "OP" and t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise DslSyntaxError(f"Unexpected {t.text or 'end of input'!r} in {self.text!r}", column=t.pos + 1)


def _exact_sqrt(x: Fraction) -> Fraction:
    if x < 0:
        raise IrrationalValueError(f"sqrt of negative value {x}")
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num != x.numerator or den * den != x.denominator:
        raise IrrationalValueError(f"sqrt({x}) is not rational")
    return Fraction(num, den)


_FUNCTIONS: Dict[str, Callable[[Fraction], Fraction]] = {"sqrt": _exact_sqrt}


def parse_expr(text: str) -> Node:
    return _Parser(text).parse()


def free_symbols(node: Node) -> set[str]:
    kind = node[0]
    if kind == "var":
        return {node[1]}
    if kind == "num":
        return set()
    if kind in ("neg", "call"):
        return free_symbols(node[-1])
    if kind == "pow":
        return free_symbols(node[1])
    return free_symbols(node[1]) | free_symbols(node[2])


def evaluate(node: Node, env: Mapping[str, Any]) -> Fraction:
    """Evaluate to an exact rational; every symbol must be bound."""
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        if node[1] not in env:
            raise UnknownSymbolError(f"Unbound symbol {node[1]!r}")
        return Fraction(env[node[1]])
    if kind == "neg":
        return -evaluate(node[1], env)
    if kind == "add":
        return evaluate(node[1], env) + evaluate(node[2], env)
    if kind == "sub":
        return evaluate(node[1], env) - evaluate(node[2], env)
    if kind == "mul":
        return evaluate(node[1], env) * evaluate(node[2], env)
    if kind == "div":
        d = evaluate(node[2], env)
        if d == 0:
            raise ZeroDivisionError("division by zero while evaluating coefficient")
        return evaluate(node[1], env) / d
    if kind == "pow":
        base = evaluate(node[1], env)
        if node[2] < 0 and base == 0:
            raise ZeroDivisionError("negative power of zero")
        return base ** node[2]
    if kind == "call":
        return _FUNCTIONS[node[1]](evaluate(node[2], env))
    raise MalformedInputError(f"Unknown node {kind!r}")


def to_poly(node: Node, variables: Sequence[str] = (), env: Mapping[str, Any] | None = None) -> MultiPoly:
    """Expand into a MultiPoly. Division is allowed only by constants."""
    env = env or {}
    kind = node[0]
    if kind == "num":
        return MultiPoly.constant(node[1], variables)
    if kind == "var":
        if node[1] in env:
            return MultiPoly.constant(env[node[1]], variables)
        return MultiPoly.variable(node[1], variables)
    if kind == "neg":
        return -to_poly(node[1], variables, env)
    if kind == "add":
        return to_poly(node[1], variables, env) + to_poly(node[2], variables, env)
    if kind == "sub":
        return to_poly(node[1], variables, env) - to_poly(node[2], variables, env)
    if kind == "mul":
        return to_poly(node[1], variables, env) * to_poly(node[2], variables, env)
    if kind == "div":
        den = to_poly(node[2], variables, env)
        if not den.is_constant() or den.is_zero():
            raise MalformedInputError("Polynomial expressions may only divide by nonzero constants")
        return to_poly(node[1], variables, env) / den.constant_value()
    if kind == "pow":
        if node[2] < 0:
            base = to_poly(node[1], variables, env)
            if not base.is_constant() or base.is_zero():
                raise MalformedInputError("Negative powers are allowed only on nonzero constants")
            return MultiPoly.constant(base.constant_value() ** node[2], variables)
        return to_poly(node[1], variables, env) ** node[2]
    if kind == "call":
        arg = to_poly(node[2], variables, env)
        if not arg.is_constant():
            raise MalformedInputError(f"{node[1]}() of a symbolic argument is not polynomial")
        return MultiPoly.constant(_FUNCTIONS[node[1]](arg.constant_value()), variables)
    raise MalformedInputError(f"Unknown node {kind!r}")


def parse_poly(text: str, variables: Sequence[str] = (), env: Mapping[str, Any] | None = None) -> MultiPoly:
    return to_poly(parse_expr(text), variables, env)


def eval_expr(text: str, env: Mapping[str, Any]) -> Fraction:
    return evaluate(parse_expr(text), env)
