from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Mapping, Sequence, Tuple

from .algebra import Algebra, annihilator, fingerprint, multiply, power_chain, Side
from .cohomology import CheckResult, Form, coboundary_space, form_to_vector
from .errors import (
    DimensionMismatchError,
    InvalidSpecError,
    SingularMatrixError,
    StabilityError,
    WorkLimitError,
)
from .linalg import Subspace, is_invertible, pivot_rows_inverse, subspace_intersect, subspace_sum
from .poly import MultiPoly, as_poly, substitute_scalar
from .scalars import FpElem, mod_p_reduce

log = logging.getLogger("bicomm")

DEFAULT_WORK_LIMIT = 10**8


# -- parametric matrix families --------------------------------------------


@dataclass(frozen=True)
class ParametricMatrixFamily:
    """A matrix phi whose entries are polynomials; column j is the image of e_j."""

    entries: Tuple[Tuple[MultiPoly, ...], ...]
    variables: Tuple[str, ...]
    name: str = "phi"
    condition: MultiPoly | None = None

    def __post_init__(self) -> None:
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise DimensionMismatchError(f"{self.name} must be square")
        cond = self.condition if self.condition is not None else self.det()
        if cond.is_zero():
            raise InvalidSpecError(f"{self.name}: invertibility condition is identically zero")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]], variables: Sequence[str], name: str = "phi") -> "ParametricMatrixFamily":
        vs = tuple(variables)
        return cls(tuple(tuple(as_poly(x, vs) for x in row) for row in rows), vs, name)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def used_variables(self) -> Tuple[str, ...]:
        seen: List[str] = []
        for row in self.entries:
            for x in row:
                for v in x.used_variables():
                    if v not in seen:
                        seen.append(v)
        return tuple(seen)

    def det(self) -> MultiPoly:
        n = self.dim
        total = MultiPoly.constant(0, self.variables)
        for perm in itertools.permutations(range(n)):
            term = MultiPoly.constant(_perm_sign(perm), self.variables)
            for i, j in enumerate(perm):
                e = self.entries[i][j]
                if e.is_zero():
                    break
                term = term * e
            else:
                total = total + term
        return total

    def substitute(self, bindings: Mapping[str, Any]) -> "ParametricMatrixFamily":
        keep = tuple(v for v in self.variables if v not in bindings)
        rows = [[as_poly(substitute_scalar(x, bindings), keep) for x in row] for row in self.entries]
        return ParametricMatrixFamily(tuple(tuple(r) for r in rows), keep, self.name)

    def instantiate(self, bindings: Mapping[str, Any]) -> List[List[Any]]:
        return [[substitute_scalar(x, bindings) for x in row] for row in self.entries]


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class ActionFormulaSet:
    """Expected coefficients a_i* of phi acting on sum a_i N_i, one per nabla."""

    nablas: Tuple[Tuple[Tuple[Any, ...], ...], ...]
    coefficients: Tuple[str, ...]
    expected: Tuple[MultiPoly, ...]
    family: str = "phi"

    def __post_init__(self) -> None:
        if not (len(self.nablas) == len(self.coefficients) == len(self.expected)):
            raise InvalidSpecError("Formula set needs one expected polynomial per nabla")


def _column(m: Sequence[Sequence[Any]], j: int) -> List[Any]:
    return [row[j] for row in m]


def _combine(a: Algebra, coeffs: Sequence[Any], cols: Sequence[Sequence[Any]], zero: Any) -> List[Any]:
    out = [zero] * len(cols[0]) if cols else []
    for c, col in zip(coeffs, cols):
        if c == 0:
            continue
        for r, x in enumerate(col):
            if x != 0:
                out[r] = out[r] + c * x
    return out


def _hom_residual(a: Algebra, b: Algebra, m: Sequence[Sequence[Any]], i: int, j: int) -> List[Any]:
    cols = [_column(m, k) for k in range(a.dim)]
    zero = b.zero_scalar()
    lhs = multiply(b, cols[i], cols[j])
    rhs = _combine(a, a.c[i][j], cols, zero)
    return [x - y for x, y in zip(lhs, rhs)]


def is_isomorphism(a: Algebra, b: Algebra, m: Sequence[Sequence[Any]]) -> bool:
    """m maps A onto B: invertible and m(e_i) m(e_j) = m(e_i e_j) with the product of B."""
    if a.dim != b.dim or len(m) != a.dim:
        return False
    if not is_invertible(m):
        return False
    return all(all(x == 0 for x in _hom_residual(a, b, m, i, j)) for i in range(a.dim) for j in range(a.dim))


def is_automorphism(a: Algebra, m: Sequence[Sequence[Any]]) -> bool:
    return is_isomorphism(a, a, m)


def certify_parametric_aut(a: Algebra, fam: ParametricMatrixFamily) -> CheckResult:
    """phi(e_i) phi(e_j) - phi(e_i e_j) must vanish as polynomials for all i, j."""
    if fam.dim != a.dim:
        raise DimensionMismatchError(f"{fam.name} is {fam.dim}x{fam.dim}, algebra has dim {a.dim}")
    undeclared = [v for v in fam.used_variables() if v not in fam.variables and v not in a.params]
    if undeclared:
        raise InvalidSpecError(f"{fam.name} uses undeclared parameters: {', '.join(undeclared)}")
    for i in range(a.dim):
        for j in range(a.dim):
            r = _hom_residual(a, a, fam.entries, i, j)
            if any(x != 0 for x in r):
                return CheckResult(False, f"{fam.name} fails on (e{i + 1}, e{j + 1})", ((i, j), tuple(r)))
    return CheckResult(True)


def act_cocycle(m: Sequence[Sequence[Any]] | ParametricMatrixFamily, theta: Sequence[Sequence[Any]]) -> Form:
    """(phi theta)(x, y) = theta(phi x, phi y), i.e. phi^T theta phi."""
    entries = m.entries if isinstance(m, ParametricMatrixFamily) else m
    n = len(theta)
    if len(entries) != n:
        raise DimensionMismatchError("Matrix and form dimensions differ")
    zero = Fraction(0)
    # t = theta . phi
    t = [[zero] * n for _ in range(n)]
    for i in range(n):
        for b in range(n):
            if theta[i][b] == 0:
                continue
            for j in range(n):
                if entries[b][j] != 0:
                    t[i][j] = t[i][j] + theta[i][b] * entries[b][j]
    out = [[zero] * n for _ in range(n)]
    for i in range(n):
        for a_ in range(n):
            if entries[a_][i] == 0:
                continue
            for j in range(n):
                if t[a_][j] != 0:
                    out[i][j] = out[i][j] + entries[a_][i] * t[a_][j]
    return out


@dataclass
class FormulaMismatch:
    index: int
    coefficient: str
    expected: MultiPoly
    computed: Any


def verify_action_formulas(
    a: Algebra,
    fam: ParametricMatrixFamily,
    fs: ActionFormulaSet,
    bindings: Mapping[str, Any] | None = None,
) -> List[FormulaMismatch]:
    """Compute phi^T (sum a_i N_i) phi, reduce modulo B^2 onto the nabla basis, compare.

    Algebra parameters are bound first (`bindings`); the matrix entries and the
    a_i stay symbolic. Returns the mismatches; an empty list means pass.
    """
    bindings = dict(bindings or {})
    if a.is_parametric():
        missing = [p for p in a.params if p not in bindings]
        if missing:
            raise InvalidSpecError(f"Bind algebra parameters before verifying actions: {', '.join(missing)}")
        a = a.substitute(bindings)
    if bindings:
        fam = fam.substitute({k: v for k, v in bindings.items() if k in fam.variables or k in fam.used_variables()})
    n = a.dim
    nablas = [[[substitute_scalar(x, bindings) for x in row] for row in f] for f in fs.nablas]
    expected = [as_poly(substitute_scalar(e, bindings)) for e in fs.expected]

    b2 = coboundary_space(a)
    columns = [[Fraction(x) for x in form_to_vector(f)] for f in nablas] + [list(v) for v in b2.basis]
    try:
        rows, inv = pivot_rows_inverse(columns)
    except SingularMatrixError as exc:
        raise InvalidSpecError(f"{fs.family}: nabla list is not independent modulo B^2") from exc

    coeff_vars = tuple(fs.coefficients)
    theta = [[MultiPoly.constant(0, coeff_vars) for _ in range(n)] for _ in range(n)]
    for name, f in zip(coeff_vars, nablas):
        var = MultiPoly.variable(name, coeff_vars)
        for i in range(n):
            for j in range(n):
                if f[i][j] != 0:
                    theta[i][j] = theta[i][j] + var * f[i][j]
    acted = form_to_vector(act_cocycle(fam, theta))

    picked = [acted[r] for r in rows]
    coords = []
    for inv_row in inv:
        acc = MultiPoly.constant(0)
        for c, x in zip(inv_row, picked):
            if c != 0 and x != 0:
                acc = acc + c * x
        coords.append(acc)

    for idx in range(n * n):
        recon = MultiPoly.constant(0)
        for c, col in zip(coords, columns):
            if col[idx] != 0:
                recon = recon + c * col[idx]
        if recon != as_poly(acted[idx]):
            raise StabilityError(
                f"{fs.family}: the action leaves span(nablas) + B^2 at coordinate D({idx // n + 1},{idx % n + 1})"
            )

    mismatches = []
    for k, (name, want) in enumerate(zip(coeff_vars, expected)):
        got = coords[k]
        if got != want:
            mismatches.append(FormulaMismatch(k, name, want, got))
    return mismatches


# -- finite-field enumeration ----------------------------------------------
#
# The backtracker works on plain ints mod p. Columns are images of basis
# vectors; each image is confined to the smallest characteristic subspace
# containing its source vector, and columns forced by a product e_i e_j are
# computed instead of enumerated.


def _int_vec(v: Sequence[Any]) -> Tuple[int, ...]:
    return tuple(int(x) for x in v)


def _tensor_p(a: Algebra) -> List[List[Tuple[int, ...]]]:
    return [[_int_vec(a.c[i][j]) for j in range(a.dim)] for i in range(a.dim)]


def _mul_p(c: List[List[Tuple[int, ...]]], u: Sequence[int], v: Sequence[int], p: int) -> Tuple[int, ...]:
    n = len(u)
    out = [0] * n
    for i, ui in enumerate(u):
        if not ui:
            continue
        for j, vj in enumerate(v):
            if not vj:
                continue
            w = ui * vj
            for k, ck in enumerate(c[i][j]):
                if ck:
                    out[k] += w * ck
    return tuple(x % p for x in out)


def _rank_p(vectors: Sequence[Sequence[int]], p: int) -> int:
    rows = [list(v) for v in vectors if any(v)]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][col], p - 2, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def _reduce_against(echelon: List[Tuple[int, Tuple[int, ...]]], v: Sequence[int], p: int) -> Tuple[int, ...]:
    w = list(v)
    for piv, row in echelon:
        f = w[piv] % p
        if f:
            w = [(x - f * y) % p for x, y in zip(w, row)]
    return tuple(x % p for x in w)


def _push_echelon(echelon: List[Tuple[int, Tuple[int, ...]]], v: Sequence[int], p: int) -> List[Tuple[int, Tuple[int, ...]]] | None:
    w = _reduce_against(echelon, v, p)
    piv = next((i for i, x in enumerate(w) if x), None)
    if piv is None:
        return None
    inv = pow(w[piv], p - 2, p)
    return echelon + [(piv, tuple(x * inv % p for x in w))]


def characteristic_subspaces(a: Algebra) -> List[Subspace]:
    """Subspaces every automorphism preserves, built in a fixed order.

    Powers A^k (k >= 2), the three annihilators, then pairwise sums and
    intersections of those.
    """
    one = a.one()
    chain = power_chain(a)
    base = [s for s in chain[1:]]
    base += [annihilator(a, Side.BOTH), annihilator(a, Side.LEFT), annihilator(a, Side.RIGHT)]
    out = list(base)
    for x, y in itertools.combinations(base, 2):
        out.append(subspace_intersect(x, y, one=one))
        out.append(subspace_sum(x, y))
    return out


def _signature(c: List[List[Tuple[int, ...]]], v: Sequence[int], p: int) -> Tuple[int, int, int, bool]:
    n = len(v)
    e = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    left = [_mul_p(c, v, ei, p) for ei in e]
    right = [_mul_p(c, ei, v, p) for ei in e]
    both = [lv + rv for lv, rv in zip(left, right)]
    return (_rank_p(left, p), _rank_p(right, p), _rank_p(both, p), not any(_mul_p(c, v, v, p)))


@dataclass
class _Plan:
    order: List[int]
    # column -> (i, j, coefficient of e_k in e_i e_j, other (l, mu) terms), for forced columns
    forced: Dict[int, Tuple[int, int, int, List[Tuple[int, int]]]]
    spaces: Dict[int, List[Tuple[int, ...]]]


def _plan(a_int: List[List[Tuple[int, ...]]], spaces: Dict[int, List[Tuple[int, ...]]], n: int) -> _Plan:
    order: List[int] = []
    forced: Dict[int, Tuple[int, int, int, List[Tuple[int, int]]]] = {}
    planned: set[int] = set()
    while len(order) < n:
        pick = None
        for i in order:
            for j in order:
                vec = a_int[i][j]
                for k in range(n):
                    if k in planned or not vec[k]:
                        continue
                    others = [(l, vec[l]) for l in range(n) if l != k and vec[l]]
                    if all(l in planned for l, _ in others):
                        pick = (k, (i, j, vec[k], others))
                        break
                if pick:
                    break
            if pick:
                break
        if pick:
            k, recipe = pick
            forced[k] = recipe
        else:
            k = max((c for c in range(n) if c not in planned), key=lambda c: (len(spaces[c]), -c))
        order.append(k)
        planned.add(k)
    return _Plan(order, forced, spaces)


def _span_vectors(basis: Sequence[Tuple[int, ...]], p: int) -> Iterator[Tuple[int, ...]]:
    n = len(basis[0]) if basis else 0
    for coeffs in itertools.product(range(p), repeat=len(basis)):
        if not any(coeffs):
            continue
        v = [0] * n
        for c, b in zip(coeffs, basis):
            if c:
                for r, x in enumerate(b):
                    if x:
                        v[r] += c * x
        yield tuple(x % p for x in v)


class _Backtracker:
    def __init__(self, a: Algebra, b: Algebra, p: int, *, node_limit: int | None = None) -> None:
        self.n = a.dim
        self.p = p
        self.ca = _tensor_p(a)
        self.cb = _tensor_p(b)
        self.node_limit = node_limit
        self.nodes = 0
        self.exhausted = False
        sa = characteristic_subspaces(a)
        sb = characteristic_subspaces(b)
        self.compatible = all(x.dim == y.dim for x, y in zip(sa, sb))
        n = self.n
        one = b.one()
        self.spaces: Dict[int, List[Tuple[int, ...]]] = {}
        for j in range(n):
            ej = a.basis_vector(j)
            target = Subspace.full(n, one)
            for x, y in zip(sa, sb):
                if x.contains(ej):
                    target = subspace_intersect(target, y, one=one)
            self.spaces[j] = [_int_vec(v) for v in target.basis]
        self.plan = _plan(self.ca, self.spaces, n)
        e = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
        self.sig_a = [_signature(self.ca, ei, p) for ei in e]
        self._sig_cache: Dict[Tuple[int, ...], Tuple[int, int, int, bool]] = {}

    def estimate(self) -> int:
        total = 1
        for k in self.plan.order:
            if k not in self.plan.forced:
                total *= self.p ** len(self.spaces[k])
        return total

    def _sig_b(self, v: Tuple[int, ...]) -> Tuple[int, int, int, bool]:
        s = self._sig_cache.get(v)
        if s is None:
            s = _signature(self.cb, v, self.p)
            self._sig_cache[v] = s
        return s

    def _forced_image(self, k: int, cols: Dict[int, Tuple[int, ...]]) -> Tuple[int, ...]:
        i, j, lam, others = self.plan.forced[k]
        p = self.p
        w = list(_mul_p(self.cb, cols[i], cols[j], p))
        for l, mu in others:
            w = [x - mu * y for x, y in zip(w, cols[l])]
        inv = pow(lam, p - 2, p)
        return tuple(x * inv % p for x in w)

    def _consistent(self, k: int, cols: Dict[int, Tuple[int, ...]]) -> bool:
        """All products among assigned columns whose targets are assigned."""
        p = self.p
        for i in cols:
            for j in cols:
                vec = self.ca[i][j]
                if k not in (i, j) and not vec[k]:
                    continue
                if any(vec[l] and l not in cols for l in range(self.n)):
                    continue
                lhs = _mul_p(self.cb, cols[i], cols[j], p)
                rhs = [0] * self.n
                for l in range(self.n):
                    if vec[l]:
                        rhs = [x + vec[l] * y for x, y in zip(rhs, cols[l])]
                if any((x - y) % p for x, y in zip(lhs, rhs)):
                    return False
        return True

    def run(self, *, first_only: bool) -> Tuple[int, List[List[List[int]]]]:
        found: List[List[List[int]]] = []
        count = 0
        order = self.plan.order

        def rec(depth: int, cols: Dict[int, Tuple[int, ...]], echelon: List[Tuple[int, Tuple[int, ...]]]) -> bool:
            nonlocal count
            if depth == len(order):
                count += 1
                if len(found) < 3:
                    found.append([[cols[j][r] for j in range(self.n)] for r in range(self.n)])
                return first_only
            k = order[depth]
            if k in self.plan.forced:
                candidates: Iterator[Tuple[int, ...]] = iter([self._forced_image(k, cols)])
            else:
                candidates = _span_vectors(self.spaces[k], self.p)
            for v in candidates:
                self.nodes += 1
                if self.node_limit is not None and self.nodes > self.node_limit:
                    self.exhausted = True
                    return True
                if self._sig_b(v) != self.sig_a[k]:
                    continue
                nxt = _push_echelon(echelon, v, self.p)
                if nxt is None:
                    continue
                cols[k] = v
                if self._consistent(k, cols) and rec(depth + 1, cols, nxt):
                    return True
                del cols[k]
            return False

        if self.compatible:
            rec(0, {}, [])
        return count, found


@dataclass
class AutCount:
    p: int
    count: int
    estimate: int
    sample: List[List[List[FpElem]]] = field(default_factory=list)


def _over_fp(a: Algebra, p: int) -> Algebra:
    if a.modulus == p:
        return a
    if a.modulus is not None:
        raise DimensionMismatchError(f"{a.name or 'algebra'} is defined over F_{a.modulus}, not F_{p}")
    return a.reduce_mod(p)


def aut_enumerate_fp(a: Algebra, p: int, *, work_limit: int = DEFAULT_WORK_LIMIT) -> AutCount:
    """|Aut(A)(F_p)| by constrained backtracking."""
    ap = _over_fp(a, p)
    bt = _Backtracker(ap, ap, p)
    est = bt.estimate()
    if est > work_limit:
        raise WorkLimitError(f"Enumeration over F_{p} needs about {est} candidate checks (limit {work_limit})", estimate=est)
    log.info("[aut] %s over F_%d: estimated work %d", a.name or "algebra", p, est)
    count, sample = bt.run(first_only=False)
    return AutCount(p, count, est, [[[FpElem(x, p) for x in row] for row in m] for m in sample])


def _compile_entry(poly: MultiPoly, variables: Sequence[str], p: int) -> List[Tuple[int, Tuple[int, ...]]]:
    index = [poly.variables.index(v) if v in poly.variables else None for v in variables]
    terms = []
    for mono, c in poly.terms.items():
        exps = tuple(mono[i] if i is not None else 0 for i in index)
        if any(m and (v not in variables) for v, m in zip(poly.variables, mono)):
            raise InvalidSpecError(f"Entry {poly} uses variables outside {tuple(variables)}")
        terms.append((mod_p_reduce(c, p).value, exps))
    return terms


def shape_census_fp(families: Sequence[ParametricMatrixFamily], p: int, *, work_limit: int = DEFAULT_WORK_LIMIT) -> int:
    """Number of distinct invertible matrices over F_p covered by the families."""
    seen: set[Tuple[Tuple[int, ...], ...]] = set()
    for fam in families:
        variables = fam.used_variables()
        total = p ** len(variables)
        if total > work_limit:
            raise WorkLimitError(f"Census of {fam.name} over F_{p} needs {total} assignments", estimate=total)
        compiled = [[_compile_entry(x, variables, p) for x in row] for row in fam.entries]
        for values in itertools.product(range(p), repeat=len(variables)):
            m = []
            for row in compiled:
                out_row = []
                for terms in row:
                    acc = 0
                    for c, exps in terms:
                        t = c
                        for val, e in zip(values, exps):
                            if e:
                                t = t * pow(val, e, p)
                        acc += t
                    out_row.append(acc % p)
                m.append(tuple(out_row))
            if _rank_p(m, p) == fam.dim:
                seen.add(tuple(m))
    return len(seen)


@dataclass
class IsoResult:
    found: bool
    p: int
    matrix: List[List[FpElem]] | None = None
    lifted: List[List[Fraction]] | None = None
    reason: str = ""
    nodes: int = 0


def _lift_matrix(m: Sequence[Sequence[FpElem]], bound: int) -> List[List[Fraction]] | None:
    out = []
    for row in m:
        lifted = [x.lift() for x in row]
        if any(abs(x) > bound for x in lifted):
            return None
        out.append(lifted)
    return out


def iso_search_fp(
    a: Algebra,
    b: Algebra,
    p: int,
    *,
    node_limit: int | None = 200_000,
    lift_bound: int = 2,
) -> IsoResult:
    """Look for an isomorphism A -> B over F_p. Not finding one proves nothing."""
    if a.dim != b.dim:
        return IsoResult(False, p, reason="dimensions differ")
    ap, bp = _over_fp(a, p), _over_fp(b, p)
    if fingerprint(ap) != fingerprint(bp):
        return IsoResult(False, p, reason="fingerprints differ over F_%d" % p)
    bt = _Backtracker(ap, bp, p, node_limit=node_limit)
    if not bt.compatible:
        return IsoResult(False, p, reason="characteristic subspace dimensions differ")
    count, found = bt.run(first_only=True)
    if not found or bt.exhausted:
        reason = "search budget exhausted" if bt.exhausted else "no isomorphism over F_%d" % p
        return IsoResult(False, p, reason=reason, nodes=bt.nodes)
    m = [[FpElem(x, p) for x in row] for row in found[0]]
    if not is_isomorphism(ap, bp, m):
        raise StabilityError("Backtracking produced a matrix that is not an isomorphism")
    lifted = None
    if a.modulus is None and b.modulus is None:
        cand = _lift_matrix(m, lift_bound)
        if cand is not None and is_isomorphism(a, b, cand):
            lifted = cand
    return IsoResult(True, p, m, lifted, nodes=bt.nodes)


def pick_primes(algebras: Sequence[Algebra], candidates: Sequence[int], count: int = 2) -> List[int]:
    """First primes from `candidates` that divide no structure-constant denominator."""
    out = []
    for p in candidates:
        ok = True
        for a in algebras:
            for row in a.c:
                for cell in row:
                    for x in cell:
                        if isinstance(x, Fraction) and x.denominator % p == 0:
                            ok = False
        if ok:
            out.append(p)
        if len(out) == count:
            break
    return out
