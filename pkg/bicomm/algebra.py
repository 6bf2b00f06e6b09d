from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from .errors import DimensionMismatchError, MustInstantiateError, SingularMatrixError
from .linalg import Subspace, inverse, is_invertible, nullspace
from .poly import MultiPoly, substitute_scalar
from .scalars import FpElem, Scalar, field_unit, mod_p_reduce

Tensor = Tuple[Tuple[Tuple[Any, ...], ...], ...]


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    BOTH = "two-sided"


class Identity(str, Enum):
    RIGHT_COMMUTATIVE = "right"  # (xy)z = (xz)y
    LEFT_COMMUTATIVE = "left"  # x(yz) = y(xz)
    COMMUTATIVE = "commutative"  # xy = yx
    TWO_STEP = "twostep"  # (xy)z = x(yz) = 0


BICOMMUTATIVE = (Identity.RIGHT_COMMUTATIVE, Identity.LEFT_COMMUTATIVE)


@dataclass(frozen=True)
class Algebra:
    """Structure constants: c[i][j][k] is the coefficient of e_k in e_i e_j (0-based).

    Entries are Fractions, FpElems (`modulus` set) or MultiPolys in the
    declared `params`.
    """

    dim: int
    c: Tensor
    name: str = ""
    params: Tuple[str, ...] = ()
    modulus: int | None = None

    def __post_init__(self) -> None:
        n = self.dim
        if len(self.c) != n or any(len(row) != n or any(len(cell) != n for cell in row) for row in self.c):
            raise DimensionMismatchError(f"Structure tensor of {self.name or 'algebra'} must be {n}x{n}x{n}")

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, name: str = "", *, modulus: int | None = None) -> "Algebra":
        z = field_unit(modulus) * 0
        return cls(dim, tuple(tuple(tuple(z for _ in range(dim)) for _ in range(dim)) for _ in range(dim)), name, (), modulus)

    @classmethod
    def from_products(
        cls,
        dim: int,
        products: Mapping[Tuple[int, int], Mapping[int, Any]],
        name: str = "",
        params: Sequence[str] = (),
        *,
        modulus: int | None = None,
    ) -> "Algebra":
        """Build from {(i, j): {k: coeff}} with 0-based indices; missing products are zero."""
        z = field_unit(modulus) * 0
        c = [[[z] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j), rhs in products.items():
            for k, coeff in rhs.items():
                c[i][j][k] = _normalize_scalar(coeff, modulus)
        return cls(dim, _freeze(c), name, tuple(params), modulus)

    # -- accessors ----------------------------------------------------------

    def product(self, i: int, j: int) -> Tuple[Any, ...]:
        return self.c[i][j]

    def one(self) -> Scalar:
        return field_unit(self.modulus)

    def zero_scalar(self) -> Scalar:
        return field_unit(self.modulus) * 0

    def basis_vector(self, i: int) -> Tuple[Scalar, ...]:
        one, zero = self.one(), self.zero_scalar()
        return tuple(one if k == i else zero for k in range(self.dim))

    def nonzero_products(self) -> List[Tuple[int, int, Tuple[Any, ...]]]:
        out = []
        for i in range(self.dim):
            for j in range(self.dim):
                vec = self.c[i][j]
                if any(x != 0 for x in vec):
                    out.append((i, j, vec))
        return out

    def is_parametric(self) -> bool:
        for row in self.c:
            for cell in row:
                for x in cell:
                    if isinstance(x, MultiPoly) and not x.is_constant():
                        return True
        return False

    def substitute(self, bindings: Mapping[str, Any], *, name: str | None = None) -> "Algebra":
        c = [[[substitute_scalar(x, bindings) for x in cell] for cell in row] for row in self.c]
        c = [[[_normalize_scalar(x, self.modulus) for x in cell] for cell in row] for row in c]
        remaining = tuple(p for p in self.params if p not in bindings)
        return Algebra(self.dim, _freeze(c), self.name if name is None else name, remaining, self.modulus)

    def reduce_mod(self, p: int) -> "Algebra":
        """Reduce a rational algebra to F_p (NonReducibleError on bad denominators)."""
        if self.is_parametric():
            raise MustInstantiateError(f"{self.name or 'algebra'} must be instantiated before reduction mod {p}")
        c = [[[mod_p_reduce(_as_fraction(x), p) for x in cell] for cell in row] for row in self.c]
        return Algebra(self.dim, _freeze(c), self.name, (), p)

    def require_concrete(self, what: str) -> None:
        if self.is_parametric():
            raise MustInstantiateError(f"{what} needs a fully instantiated algebra; {self.name or 'algebra'} is parametric")


def _as_fraction(x: Any) -> Fraction:
    if isinstance(x, MultiPoly):
        return x.constant_value()
    return Fraction(x)


def _normalize_scalar(x: Any, modulus: int | None) -> Any:
    if modulus is not None:
        if isinstance(x, FpElem):
            return x
        return mod_p_reduce(_as_fraction(x), modulus)
    if isinstance(x, MultiPoly):
        return x.constant_value() if x.is_constant() else x
    if isinstance(x, int):
        return Fraction(x)
    return x


def _freeze(c: List[List[List[Any]]]) -> Tensor:
    return tuple(tuple(tuple(cell) for cell in row) for row in c)


# -- operations ------------------------------------------------------------


def multiply(a: Algebra, u: Sequence[Any], v: Sequence[Any]) -> Tuple[Any, ...]:
    """Bilinear product sum u_i v_j c[i][j][.]."""
    n = a.dim
    if len(u) != n or len(v) != n:
        raise DimensionMismatchError(f"Vectors must have length {n}")
    out: List[Any] = [a.zero_scalar()] * n
    for i, ui in enumerate(u):
        if ui == 0:
            continue
        for j, vj in enumerate(v):
            if vj == 0:
                continue
            w = ui * vj
            cell = a.c[i][j]
            for k in range(n):
                if cell[k] != 0:
                    out[k] = out[k] + w * cell[k]
    return tuple(out)


def _sub(u: Sequence[Any], v: Sequence[Any]) -> Tuple[Any, ...]:
    return tuple(x - y for x, y in zip(u, v))


@dataclass
class IdentityCheck:
    identity: Identity
    violations: List[Tuple[Tuple[int, ...], Tuple[Any, ...]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_identity(a: Algebra, identity: Identity) -> IdentityCheck:
    """Evaluate the identity on all basis tuples; residuals must vanish (as polynomials)."""
    n = a.dim
    e = [a.basis_vector(i) for i in range(n)]
    result = IdentityCheck(identity)

    def mul(u: Sequence[Any], v: Sequence[Any]) -> Tuple[Any, ...]:
        return multiply(a, u, v)

    if identity is Identity.COMMUTATIVE:
        for i in range(n):
            for j in range(i + 1, n):
                r = _sub(a.c[i][j], a.c[j][i])
                if any(x != 0 for x in r):
                    result.violations.append(((i, j), r))
        return result

    for x in range(n):
        for y in range(n):
            xy = a.c[x][y]
            for z in range(n):
                if identity is Identity.RIGHT_COMMUTATIVE:
                    r = _sub(mul(xy, e[z]), mul(a.c[x][z], e[y]))
                    residuals = [r]
                elif identity is Identity.LEFT_COMMUTATIVE:
                    r = _sub(mul(e[x], a.c[y][z]), mul(e[y], a.c[x][z]))
                    residuals = [r]
                else:
                    residuals = [mul(xy, e[z]), mul(e[x], a.c[y][z])]
                for r in residuals:
                    if any(v != 0 for v in r):
                        result.violations.append(((x, y, z), r))
                        break
    return result


def is_bicommutative(a: Algebra) -> bool:
    return all(check_identity(a, ident).passed for ident in BICOMMUTATIVE)


def is_commutative(a: Algebra) -> bool:
    return check_identity(a, Identity.COMMUTATIVE).passed


def is_two_step(a: Algebra) -> bool:
    return check_identity(a, Identity.TWO_STEP).passed


def _products_span(a: Algebra, left: Subspace, right: Subspace) -> List[Tuple[Any, ...]]:
    return [multiply(a, u, v) for u in left.basis for v in right.basis]


def power_chain(a: Algebra, *, max_steps: int | None = None) -> List[Subspace]:
    """[A^1, A^2, ...] with A^k = sum over i+j=k of A^i A^j.

    Stops at the first zero power or when the chain stabilizes.
    """
    a.require_concrete("power_chain")
    n = a.dim
    chain = [Subspace.full(n, a.one())]
    limit = max_steps if max_steps is not None else n + 2
    while len(chain) < limit + 1:
        k = len(chain) + 1
        vectors: List[Tuple[Any, ...]] = []
        for i in range(1, k):
            vectors.extend(_products_span(a, chain[i - 1], chain[k - i - 1]))
        nxt = Subspace.span(vectors, n)
        chain.append(nxt)
        if nxt.dim == 0 or nxt == chain[-2]:
            break
    return chain


def nilpotency_index(a: Algebra) -> int | None:
    """Least k with A^k = 0, or None for non-nilpotent algebras."""
    chain = power_chain(a)
    for k, sub in enumerate(chain, start=1):
        if sub.dim == 0:
            return k
    return None


def annihilator(a: Algebra, side: Side | str = Side.BOTH) -> Subspace:
    """left = {x : xA = 0}, right = {x : Ax = 0}, two-sided = both."""
    a.require_concrete("annihilator")
    side = Side(side)
    n = a.dim
    rows: List[List[Any]] = []
    if side in (Side.LEFT, Side.BOTH):
        for j in range(n):
            for k in range(n):
                rows.append([a.c[i][j][k] for i in range(n)])
    if side in (Side.RIGHT, Side.BOTH):
        for j in range(n):
            for k in range(n):
                rows.append([a.c[j][i][k] for i in range(n)])
    rows = [r for r in rows if any(x != 0 for x in r)]
    return nullspace(rows, n, one=a.one())


def change_basis(a: Algebra, m: Sequence[Sequence[Any]], *, name: str | None = None) -> Algebra:
    """Structure constants in the basis e'_i = sum_k m[k][i] e_k (columns of m)."""
    n = a.dim
    if len(m) != n or any(len(row) != n for row in m):
        raise DimensionMismatchError(f"Basis change must be {n}x{n}")
    if not is_invertible(m):
        raise SingularMatrixError("Basis change matrix is singular")
    minv = inverse(m)
    zero = a.zero_scalar()
    c = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        ei = [m[r][i] for r in range(n)]
        for j in range(n):
            ej = [m[r][j] for r in range(n)]
            prod = multiply(a, ei, ej)
            for k in range(n):
                acc = zero
                for l in range(n):
                    if prod[l] != 0 and minv[k][l] != 0:
                        acc = acc + minv[k][l] * prod[l]
                c[i][j][k] = acc
    return Algebra(n, _freeze(c), a.name if name is None else name, a.params, a.modulus)


@dataclass(frozen=True)
class Fingerprint:
    dim: int
    dim_a2: int
    dim_a3: int
    dim_a4: int
    nilindex: int
    dim_ann: int
    dim_left_ann: int
    dim_right_ann: int
    dim_z2: int
    dim_b2: int
    dim_h2: int
    dim_h2_com: int
    commutative: bool

    def as_tuple(self) -> Tuple[Any, ...]:
        return (
            self.dim,
            self.dim_a2,
            self.dim_a3,
            self.dim_a4,
            self.nilindex,
            self.dim_ann,
            self.dim_left_ann,
            self.dim_right_ann,
            self.dim_z2,
            self.dim_b2,
            self.dim_h2,
            self.dim_h2_com,
            self.commutative,
        )

    def as_dict(self) -> Dict[str, Any]:
        return dict(zip(FINGERPRINT_FIELDS, self.as_tuple()))

    def __str__(self) -> str:
        return "(" + ",".join(str(x).lower() if isinstance(x, bool) else str(x) for x in self.as_tuple()) + ")"


FINGERPRINT_FIELDS = (
    "dim",
    "dim_a2",
    "dim_a3",
    "dim_a4",
    "nilindex",
    "dim_ann",
    "dim_left_ann",
    "dim_right_ann",
    "dim_z2",
    "dim_b2",
    "dim_h2",
    "dim_h2_com",
    "commutative",
)


def fingerprint(a: Algebra) -> Fingerprint:
    a.require_concrete("fingerprint")
    from .cohomology import h2

    chain = power_chain(a)
    dims = [s.dim for s in chain] + [0, 0, 0, 0]
    index = next((k for k, s in enumerate(chain, start=1) if s.dim == 0), 0)
    coh = h2(a)
    return Fingerprint(
        dim=a.dim,
        dim_a2=dims[1],
        dim_a3=dims[2],
        dim_a4=dims[3],
        nilindex=index,
        dim_ann=annihilator(a, Side.BOTH).dim,
        dim_left_ann=annihilator(a, Side.LEFT).dim,
        dim_right_ann=annihilator(a, Side.RIGHT).dim,
        dim_z2=coh.z2.dim,
        dim_b2=coh.b2.dim,
        dim_h2=coh.dim_h2,
        dim_h2_com=coh.dim_h2_com,
        commutative=is_commutative(a),
    )


def direct_sum_zero(a: Algebra, extra: int) -> Algebra:
    """A plus `extra` basis vectors with zero products (the split extension)."""
    n = a.dim + extra
    zero = a.zero_scalar()
    c = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for i in range(a.dim):
        for j in range(a.dim):
            for k in range(a.dim):
                c[i][j][k] = a.c[i][j][k]
    return Algebra(n, _freeze(c), f"{a.name}+{extra}" if a.name else "", a.params, a.modulus)
