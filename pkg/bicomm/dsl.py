from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from .algebra import Algebra
from .cohomology import Form, zero_form
from .errors import DslSyntaxError, MalformedInputError, UnknownSymbolError
from .expr import free_symbols, parse_expr, to_poly
from .poly import MultiPoly
from .scalars import format_rational, parse_rational

# Algebra files:
#
#   algebra N04 dim 4
#   param alpha != 0
#   e1*e1 = e3
#   e2*e2 = alpha e3      # comments run to end of line
#
# Coefficients are expressions in the declared params ("(1-alpha) e4",
# "-2 e3", "1/2 e1 + e2").

_HEADER_RE = re.compile(r"^algebra\s+(\S+)\s+dim\s+(\d+)$")
_PARAM_RE = re.compile(r"^param\s+([A-Za-z_][A-Za-z0-9_]*)\s*((?:!=\s*[^!]+)*)$")
_PRODUCT_RE = re.compile(r"^e(\d+)\s*\*\s*e(\d+)\s*=\s*(.+)$")
_BASIS_TERM_RE = re.compile(r"e(\d+)\s*$")
_ATOM_RE = re.compile(r"(?:D\(\s*(\d+)\s*,\s*(\d+)\s*\)|N(\d+))\s*$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Constraint:
    """Excludes the point where every name takes the paired value."""

    names: Tuple[str, ...]
    values: Tuple[Fraction, ...]

    def violated(self, bindings: Mapping[str, Any]) -> bool:
        if not all(n in bindings for n in self.names):
            return False
        return all(Fraction(bindings[n]) == v for n, v in zip(self.names, self.values))

    def __str__(self) -> str:
        if len(self.names) == 1:
            return f"{self.names[0]} != {format_rational(self.values[0])}"
        lhs = ",".join(self.names)
        rhs = ",".join(format_rational(v) for v in self.values)
        return f"({lhs}) != ({rhs})"


@dataclass
class ParsedAlgebra:
    algebra: Algebra
    constraints: List[Constraint] = field(default_factory=list)

    @property
    def params(self) -> Tuple[str, ...]:
        return self.algebra.params


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def split_terms(text: str) -> List[str]:
    """Split on top-level + and - that act as binary operators; signs stay with the term."""
    terms: List[str] = []
    depth = 0
    start = 0
    prev = ""
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DslSyntaxError(f"Unbalanced parenthesis in {text!r}", column=i + 1)
        elif ch in "+-" and depth == 0 and i > start and prev not in "*/^(+-":
            terms.append(text[start:i].strip())
            start = i
        if not ch.isspace():
            prev = ch
    if depth != 0:
        raise DslSyntaxError(f"Unbalanced parenthesis in {text!r}")
    terms.append(text[start:].strip())
    return [t for t in terms if t]


def _coefficient(prefix: str, variables: Sequence[str], env: Mapping[str, Any], *, context: str) -> Any:
    prefix = prefix.strip()
    if prefix.endswith("*"):
        prefix = prefix[:-1].strip()
    if prefix in ("", "+"):
        return Fraction(1)
    if prefix == "-":
        return Fraction(-1)
    try:
        node = parse_expr(prefix)
    except DslSyntaxError as exc:
        raise DslSyntaxError(f"Malformed coefficient {prefix!r} in {context!r}") from exc
    unknown = sorted(s for s in free_symbols(node) if s not in variables and s not in env)
    if unknown:
        raise UnknownSymbolError(f"Unknown symbol {unknown[0]!r} in {context!r}")
    poly = to_poly(node, variables, env)
    return poly.constant_value() if poly.is_constant() else poly


def parse_constraints(text: str) -> List[Constraint]:
    """`alpha != 0, (alpha,beta) != (0,0)`"""
    out: List[Constraint] = []
    for part in _split_top_level(text, ","):
        part = part.strip()
        if not part:
            continue
        if "!=" not in part:
            raise DslSyntaxError(f"Constraint must have the form name != value: {part!r}")
        lhs, rhs = (s.strip() for s in part.split("!=", 1))
        if lhs.startswith("("):
            names = tuple(s.strip() for s in lhs.strip("()").split(","))
            values = tuple(parse_rational(s) for s in rhs.strip("()").split(","))
        else:
            names = (lhs,)
            values = (parse_rational(rhs),)
        if len(names) != len(values) or not all(_IDENT_RE.match(n) for n in names):
            raise DslSyntaxError(f"Malformed constraint {part!r}")
        out.append(Constraint(names, values))
    return out


def _split_top_level(text: str, sep: str) -> List[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def parse_algebra(text: str, *, name: str | None = None) -> ParsedAlgebra:
    dim: int | None = None
    alg_name = name or ""
    params: List[str] = []
    constraints: List[Constraint] = []
    products: Dict[Tuple[int, int], Dict[int, Any]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if dim is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise DslSyntaxError("Expected header `algebra <name> dim <n>`", line=lineno, column=1)
            alg_name = name or m.group(1)
            dim = int(m.group(2))
            continue
        if line.startswith("param"):
            m = _PARAM_RE.match(line)
            if not m:
                raise DslSyntaxError("Expected `param <name> [!= <value> ...]`", line=lineno, column=1)
            pname = m.group(1)
            if pname in params:
                raise DslSyntaxError(f"Parameter {pname!r} declared twice", line=lineno)
            params.append(pname)
            for chunk in m.group(2).split("!=")[1:]:
                try:
                    constraints.append(Constraint((pname,), (parse_rational(chunk),)))
                except MalformedInputError as exc:
                    raise DslSyntaxError(str(exc), line=lineno) from exc
            continue
        m = _PRODUCT_RE.match(line)
        if not m:
            raise DslSyntaxError(f"Cannot parse {line!r}", line=lineno, column=1)
        i, j = int(m.group(1)), int(m.group(2))
        for idx in (i, j):
            if not 1 <= idx <= dim:
                raise DslSyntaxError(f"Basis index e{idx} out of range 1..{dim}", line=lineno)
        if (i - 1, j - 1) in products:
            raise DslSyntaxError(f"Duplicate product e{i}*e{j}", line=lineno)
        rhs = m.group(3).strip()
        vec: Dict[int, Any] = {}
        if rhs != "0":
            for term in split_terms(rhs):
                tm = _BASIS_TERM_RE.search(term)
                if not tm:
                    raise DslSyntaxError(f"Term {term!r} does not end in a basis vector", line=lineno)
                k = int(tm.group(1))
                if not 1 <= k <= dim:
                    raise DslSyntaxError(f"Basis index e{k} out of range 1..{dim}", line=lineno)
                try:
                    coeff = _coefficient(term[: tm.start()], params, {}, context=line)
                except DslSyntaxError as exc:
                    raise DslSyntaxError(str(exc), line=lineno) from exc
                vec[k - 1] = vec.get(k - 1, Fraction(0)) + coeff
        products[(i - 1, j - 1)] = vec
    if dim is None:
        raise DslSyntaxError("Empty algebra description", line=1, column=1)
    return ParsedAlgebra(Algebra.from_products(dim, products, alg_name, params), constraints)


def _format_coeff(c: Any) -> str:
    if isinstance(c, MultiPoly):
        text = str(c)
        return text if _IDENT_RE.match(text) else f"({text})"
    if hasattr(c, "lift"):
        c = c.lift()
    return format_rational(c)


def serialize_algebra(a: Algebra, constraints: Sequence[Constraint] = ()) -> str:
    """Canonical text: header, params, then products in lex (i, j) order."""
    lines = [f"algebra {a.name or 'A'} dim {a.dim}"]
    for p in a.params:
        excl = [c for c in constraints if c.names == (p,)]
        suffix = "".join(f" != {format_rational(c.values[0])}" for c in excl)
        lines.append(f"param {p}{suffix}")
    for i, j, vec in a.nonzero_products():
        parts: List[str] = []
        for k, c in enumerate(vec):
            if c == 0:
                continue
            basis = f"e{k + 1}"
            if isinstance(c, MultiPoly):
                parts.append(f"+ {_format_coeff(c)} {basis}")
                continue
            text = _format_coeff(c)
            if text == "1":
                parts.append(f"+ {basis}")
            elif text == "-1":
                parts.append(f"- {basis}")
            elif text.startswith("-"):
                parts.append(f"- {text[1:]} {basis}")
            else:
                parts.append(f"+ {text} {basis}")
        rhs = " ".join(parts)
        rhs = rhs[2:] if rhs.startswith("+ ") else "-" + rhs[2:] if rhs.startswith("- ") else rhs
        lines.append(f"e{i + 1}*e{j + 1} = {rhs}")
    return "\n".join(lines) + "\n"


# -- cocycles ----------------------------------------------------------------


def parse_cocycle(
    text: str,
    nablas: Mapping[str, Form],
    dim: int,
    *,
    variables: Sequence[str] = (),
    env: Mapping[str, Any] | None = None,
) -> List[Form]:
    """`N3+N4+N7`, `D(1,4) + 2 D(3,3)`, pairs separated by `;`. Indices are 1-based."""
    env = dict(env or {})
    forms: List[Form] = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            raise DslSyntaxError(f"Empty cocycle in {text!r}")
        theta = zero_form(dim)
        if part != "0":
            for term in split_terms(part):
                am = _ATOM_RE.search(term)
                if not am:
                    raise MalformedInputError(f"Malformed cocycle term {term!r}")
                coeff = _coefficient(term[: am.start()], variables, env, context=part)
                if am.group(3) is not None:
                    key = f"N{am.group(3)}"
                    if key not in nablas:
                        raise UnknownSymbolError(f"Unknown symbol {key!r}")
                    atom = nablas[key]
                else:
                    i, j = int(am.group(1)), int(am.group(2))
                    if not (1 <= i <= dim and 1 <= j <= dim):
                        raise MalformedInputError(f"D({i},{j}) out of range for dimension {dim}")
                    atom = zero_form(dim)
                    atom[i - 1][j - 1] = Fraction(1)
                for r in range(dim):
                    for s in range(dim):
                        if atom[r][s] != 0:
                            theta[r][s] = theta[r][s] + coeff * atom[r][s]
        forms.append(_collapse(theta))
    return forms


def _collapse(theta: Form) -> Form:
    return [[x.constant_value() if isinstance(x, MultiPoly) and x.is_constant() else x for x in row] for row in theta]


def parse_nablas(text: str, dim: int, *, variables: Sequence[str] = ()) -> Dict[str, Form]:
    """Lines `N<k> = <D-combination>`."""
    out: Dict[str, Form] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = re.match(r"^(N\d+)\s*=\s*(.+)$", line)
        if not m:
            raise DslSyntaxError("Expected `N<k> = <combination>`", line=lineno, column=1)
        if m.group(1) in out:
            raise DslSyntaxError(f"{m.group(1)} defined twice", line=lineno)
        try:
            out[m.group(1)] = parse_cocycle(m.group(2), {}, dim, variables=variables)[0]
        except MalformedInputError as exc:
            raise DslSyntaxError(str(exc), line=lineno) from exc
    return out


# -- matrices and formulas -------------------------------------------------


@dataclass
class MatrixBlock:
    name: str
    rows: List[List[MultiPoly]]
    variables: Tuple[str, ...]
    constraints: List[Constraint] = field(default_factory=list)


def _blocks(text: str, default: str) -> List[Tuple[str, List[Tuple[int, str]]]]:
    blocks: List[Tuple[str, List[Tuple[int, str]]]] = []
    current: Tuple[str, List[Tuple[int, str]]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = re.match(r"^\[([A-Za-z0-9_]+)\]$", line)
        if m:
            current = (m.group(1), [])
            blocks.append(current)
            continue
        if current is None:
            current = (default, [])
            blocks.append(current)
        current[1].append((lineno, line))
    return blocks


def parse_matrix(text: str, *, params: Sequence[str] = ()) -> List[MatrixBlock]:
    """Comma-separated rows; `[name]` starts a new family, `where ...` attaches constraints.

    Variables are ordered as the algebra params first, then matrix entries in
    row-major order of first appearance.
    """
    out: List[MatrixBlock] = []
    for name, lines in _blocks(text, "phi"):
        raw_rows: List[List[Any]] = []
        constraints: List[Constraint] = []
        order: List[str] = list(params)
        for lineno, line in lines:
            if line.startswith("where"):
                constraints.extend(parse_constraints(line[len("where"):]))
                continue
            try:
                nodes = [parse_expr(cell.strip()) for cell in _split_top_level(line, ",")]
            except DslSyntaxError as exc:
                raise DslSyntaxError(str(exc), line=lineno) from exc
            for node in nodes:
                for sym in sorted(free_symbols(node), key=lambda s: line.find(s)):
                    if sym not in order:
                        order.append(sym)
            raw_rows.append(nodes)
        n = len(raw_rows)
        if n == 0 or any(len(r) != n for r in raw_rows):
            raise DslSyntaxError(f"Matrix {name} must be square, got {n} rows of lengths {[len(r) for r in raw_rows]}")
        variables = tuple(order)
        rows = [[to_poly(node, variables) for node in r] for r in raw_rows]
        out.append(MatrixBlock(name, rows, variables, constraints))
    return out


def parse_formulas(text: str, *, variables: Sequence[str] = ()) -> Dict[str, List[Tuple[str, MultiPoly]]]:
    """`a<k>* = <polynomial>` lines grouped under `[name]` headers (default `phi`)."""
    out: Dict[str, List[Tuple[str, MultiPoly]]] = {}
    for name, lines in _blocks(text, "phi"):
        entries: List[Tuple[str, MultiPoly]] = []
        for lineno, line in lines:
            m = re.match(r"^(a\d+)\*\s*=\s*(.+)$", line)
            if not m:
                raise DslSyntaxError("Expected `a<k>* = <polynomial>`", line=lineno, column=1)
            try:
                entries.append((m.group(1), to_poly(parse_expr(m.group(2)), variables)))
            except MalformedInputError as exc:
                raise DslSyntaxError(str(exc), line=lineno) from exc
        out[name] = entries
    return out


def parse_bindings(text: str) -> Dict[str, Fraction]:
    """`alpha=2,beta=-1/3`"""
    out: Dict[str, Fraction] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise MalformedInputError(f"Binding must be name=value: {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        if not _IDENT_RE.match(k):
            raise MalformedInputError(f"Bad parameter name {k!r}")
        out[k] = parse_rational(v)
    return out
