from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List, Sequence, Tuple

from .algebra import Algebra, _freeze, annihilator
from .errors import DimensionMismatchError, InvalidSpecError
from .linalg import Subspace, extend_basis, nullspace, quotient_reps, rank, subspace_intersect
from .scalars import Scalar, field_unit

# A bilinear form is an n x n matrix; entry (i, j) is the coefficient of
# Delta_ij, i.e. theta(e_i, e_j). As a vector it is flattened row-major, so
# Delta_11 < Delta_12 < ... is the coordinate order.

Form = List[List[Any]]


def zero_form(n: int, zero: Scalar | None = None) -> Form:
    z = field_unit(None) * 0 if zero is None else zero
    return [[z] * n for _ in range(n)]


def delta(i: int, j: int, n: int, one: Scalar | None = None) -> Form:
    """Delta_ij with 0-based indices."""
    one = field_unit(None) if one is None else one
    f = zero_form(n, one * 0)
    f[i][j] = one
    return f


def form_to_vector(theta: Sequence[Sequence[Any]]) -> Tuple[Any, ...]:
    return tuple(x for row in theta for x in row)


def vector_to_form(v: Sequence[Any], n: int) -> Form:
    if len(v) != n * n:
        raise DimensionMismatchError(f"Form vector has length {len(v)}, expected {n * n}")
    return [list(v[i * n : (i + 1) * n]) for i in range(n)]


def symmetric_forms(n: int, one: Scalar | None = None) -> Subspace:
    one = field_unit(None) if one is None else one
    vecs = []
    for i in range(n):
        for j in range(i, n):
            f = delta(i, j, n, one)
            if i != j:
                f[j][i] = one
            vecs.append(form_to_vector(f))
    return Subspace.span(vecs, n * n)


def render_form(theta: Sequence[Sequence[Any]]) -> str:
    """`D(i,j)` sum with 1-based indices, as accepted by the cocycle parser."""
    from .scalars import format_rational

    parts: List[str] = []
    for i, row in enumerate(theta):
        for j, x in enumerate(row):
            if x == 0:
                continue
            atom = f"D({i + 1},{j + 1})"
            if hasattr(x, "lift"):
                x = x.lift()
            if x == 1:
                parts.append(f"+ {atom}")
            elif x == -1:
                parts.append(f"- {atom}")
            else:
                text = format_rational(x) if not hasattr(x, "terms") else f"({x})"
                if text.startswith("-"):
                    parts.append(f"- {text[1:]} {atom}")
                else:
                    parts.append(f"+ {text} {atom}")
    if not parts:
        return "0"
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else "-" + out[1:]


# -- Z^2, B^2, H^2 ----------------------------------------------------------


def cocycle_constraint_rows(a: Algebra) -> List[List[Any]]:
    """Rows over the n^2 form coordinates for theta(xy,z) = theta(xz,y) and theta(x,yz) = theta(y,xz)."""
    n = a.dim
    c = a.c
    zero = a.zero_scalar()
    rows: List[List[Any]] = []
    for x in range(n):
        for y in range(n):
            for z in range(n):
                right = [zero] * (n * n)
                left = [zero] * (n * n)
                for k in range(n):
                    if c[x][y][k] != 0:
                        right[k * n + z] = right[k * n + z] + c[x][y][k]
                    if c[x][z][k] != 0:
                        right[k * n + y] = right[k * n + y] - c[x][z][k]
                    if c[y][z][k] != 0:
                        left[x * n + k] = left[x * n + k] + c[y][z][k]
                    if c[x][z][k] != 0:
                        left[y * n + k] = left[y * n + k] - c[x][z][k]
                for row in (right, left):
                    if any(v != 0 for v in row):
                        rows.append(row)
    return rows


def is_cocycle(a: Algebra, theta: Sequence[Sequence[Any]]) -> bool:
    """Direct check of both cocycle identities; works for parametric algebras and forms."""
    n = a.dim
    if len(theta) != n or any(len(r) != n for r in theta):
        raise DimensionMismatchError(f"Form must be {n}x{n}")
    v = form_to_vector(theta)
    for row in cocycle_constraint_rows(a):
        acc = a.zero_scalar()
        for coeff, t in zip(row, v):
            if coeff != 0 and t != 0:
                acc = acc + coeff * t
        if acc != 0:
            return False
    return True


def cocycle_space(a: Algebra) -> Subspace:
    a.require_concrete("cocycle_space")
    return nullspace(cocycle_constraint_rows(a), a.dim * a.dim, one=a.one())


def coboundary_forms(a: Algebra) -> List[Form]:
    """delta f_k for the dual basis: (e_i, e_j) -> c[i][j][k]."""
    n = a.dim
    return [[[a.c[i][j][k] for j in range(n)] for i in range(n)] for k in range(n)]


def coboundary_space(a: Algebra) -> Subspace:
    a.require_concrete("coboundary_space")
    vecs = [form_to_vector(f) for f in coboundary_forms(a)]
    return Subspace.span([v for v in vecs if any(x != 0 for x in v)], a.dim * a.dim)


@dataclass
class CohomologySpace:
    algebra: Algebra
    z2: Subspace
    b2: Subspace
    h2_reps: List[Tuple[Any, ...]]
    h2_com_reps: List[Tuple[Any, ...]]

    @property
    def dim_h2(self) -> int:
        return len(self.h2_reps)

    @property
    def dim_h2_com(self) -> int:
        return len(self.h2_com_reps)

    def rep_forms(self, commutative: bool = False) -> List[Form]:
        reps = self.h2_com_reps if commutative else self.h2_reps
        return [vector_to_form(v, self.algebra.dim) for v in reps]

    def class_rank(self, forms: Sequence[Sequence[Sequence[Any]]]) -> int:
        """Dimension of the span of the classes [theta] in H^2."""
        vecs = [list(form_to_vector(f)) for f in forms]
        base = [list(v) for v in self.b2.basis]
        if not vecs:
            return 0
        return rank(base + vecs) - self.b2.dim


def h2(a: Algebra) -> CohomologySpace:
    z2 = cocycle_space(a)
    b2 = coboundary_space(a)
    reps = quotient_reps(z2, b2)
    sym = subspace_intersect(symmetric_forms(a.dim, a.one()), z2, one=a.one())
    com = extend_basis(b2.basis, sym.basis)
    return CohomologySpace(a, z2, b2, reps, com)


# -- annihilators and extensions -------------------------------------------


def cocycle_annihilator(theta: Sequence[Sequence[Any]], *, one: Scalar | None = None) -> Subspace:
    """{x : theta(x, .) = 0 and theta(., x) = 0}."""
    n = len(theta)
    rows = [[theta[i][j] for i in range(n)] for j in range(n)] + [list(r) for r in theta]
    rows = [r for r in rows if any(x != 0 for x in r)]
    return nullspace(rows, n, one=one)


@dataclass(frozen=True)
class ExtensionSpec:
    base: Algebra
    cocycles: Tuple[Tuple[Tuple[Any, ...], ...], ...]

    @classmethod
    def of(cls, base: Algebra, forms: Sequence[Sequence[Sequence[Any]]]) -> "ExtensionSpec":
        if not forms:
            raise InvalidSpecError("An extension needs at least one cocycle")
        for f in forms:
            if len(f) != base.dim or any(len(r) != base.dim for r in f):
                raise DimensionMismatchError(f"Cocycle must be {base.dim}x{base.dim}")
        return cls(base, tuple(tuple(tuple(r) for r in f) for f in forms))

    @property
    def s(self) -> int:
        return len(self.cocycles)

    def forms(self) -> List[Form]:
        return [[list(r) for r in f] for f in self.cocycles]


@dataclass
class CheckResult:
    passed: bool
    detail: str = ""
    witness: Any = None

    def __bool__(self) -> bool:
        return self.passed


def _require_cocycles(spec: ExtensionSpec) -> None:
    for idx, f in enumerate(spec.cocycles, start=1):
        if not is_cocycle(spec.base, f):
            raise InvalidSpecError(f"Cocycle {idx} of the extension of {spec.base.name or 'algebra'} is not in Z^2")


def ts_check(spec: ExtensionSpec) -> CheckResult:
    """Ann(theta_1) n ... n Ann(theta_s) n Ann(A) must be zero."""
    _require_cocycles(spec)
    a = spec.base
    a.require_concrete("ts_check")
    acc = annihilator(a)
    for f in spec.cocycles:
        acc = subspace_intersect(acc, cocycle_annihilator(f, one=a.one()), one=a.one())
        if acc.dim == 0:
            break
    if acc.dim:
        return CheckResult(False, "common annihilator of the cocycles meets Ann(A)", acc.basis[0])
    return CheckResult(True)


def nonsplit_check(spec: ExtensionSpec, coh: CohomologySpace | None = None) -> CheckResult:
    coh = coh or h2(spec.base)
    r = coh.class_rank(spec.cocycles)
    if r < spec.s:
        return CheckResult(False, f"cohomology classes are dependent (rank {r} < {spec.s})")
    ts = ts_check(spec)
    if not ts:
        return CheckResult(False, ts.detail, ts.witness)
    return CheckResult(True)


def central_extension(spec: ExtensionSpec, *, name: str = "", check: bool = True) -> Algebra:
    """A + V with xy + sum theta_t(x, y) e_{n+t}; V annihilates everything."""
    if check:
        _require_cocycles(spec)
    a = spec.base
    n, s = a.dim, spec.s
    m = n + s
    zero = a.zero_scalar()
    c = [[[zero] * m for _ in range(m)] for _ in range(m)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                c[i][j][k] = a.c[i][j][k]
            for t, f in enumerate(spec.cocycles):
                c[i][j][n + t] = f[i][j]
    return Algebra(m, _freeze(c), name or (f"{a.name}_ext" if a.name else ""), a.params, a.modulus)


def _embed(v: Sequence[Any], extra: int, zero: Any) -> Tuple[Any, ...]:
    return tuple(v) + (zero,) * extra


def extension_annihilator_law(spec: ExtensionSpec) -> CheckResult:
    """Ann(A_theta) == (Ann(theta) n Ann(A)) + V."""
    a = spec.base
    a.require_concrete("extension_annihilator_law")
    ext = central_extension(spec)
    lhs = annihilator(ext)
    common = annihilator(a)
    for f in spec.cocycles:
        common = subspace_intersect(common, cocycle_annihilator(f, one=a.one()), one=a.one())
    zero, one = a.zero_scalar(), a.one()
    vecs = [_embed(v, spec.s, zero) for v in common.basis]
    for t in range(spec.s):
        vecs.append(tuple(one if k == a.dim + t else zero for k in range(ext.dim)))
    rhs = Subspace.span(vecs, ext.dim)
    if lhs == rhs:
        return CheckResult(True)
    extra = next((v for v in lhs.basis if not rhs.contains(v)), None)
    if extra is None:
        extra = next((v for v in rhs.basis if not lhs.contains(v)), None)
    return CheckResult(False, f"Ann(A_theta) has dim {lhs.dim}, decomposition gives {rhs.dim}", extra)


@dataclass
class GeneratorCheck:
    in_z2: bool
    span_dim: int
    missing: List[int] = field(default_factory=list)


def check_generators(coh: CohomologySpace, forms: Sequence[Sequence[Sequence[Any]]]) -> GeneratorCheck:
    """Do the listed forms lie in Z^2, and how much of H^2 do their classes span?"""
    bad = [i for i, f in enumerate(forms) if not coh.z2.contains(form_to_vector(f))]
    return GeneratorCheck(not bad, coh.class_rank(forms), bad)
