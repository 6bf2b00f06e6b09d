from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Sequence, Tuple

from .errors import ContainmentError, DimensionMismatchError, SingularMatrixError
from .scalars import Scalar, one_like, zero_like

Vector = Tuple[Scalar, ...]
Matrix = List[List[Scalar]]


def _coerce(x: Any) -> Any:
    return Fraction(x) if isinstance(x, int) else x


def _unit(rows: Sequence[Sequence[Any]], one: Scalar | None) -> Scalar:
    if one is not None:
        return one
    for row in rows:
        for x in row:
            return one_like(x)
    return Fraction(1)


def rref(m: Sequence[Sequence[Scalar]]) -> Tuple[Matrix, List[int], int]:
    """Reduced row echelon form with first-nonzero pivoting, column by column."""
    rows: Matrix = [[_coerce(x) for x in row] for row in m]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        pivot_row = rows[r]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f != 0:
                    rows[i] = [a - f * b for a, b in zip(rows[i], pivot_row)]
        pivots.append(c)
        r += 1
    return rows, pivots, r


def rank(m: Sequence[Sequence[Scalar]]) -> int:
    return rref(m)[2]


@dataclass(frozen=True)
class Subspace:
    """Subspace of F^ambient_dim held by its canonical rref basis."""

    ambient_dim: int
    basis: Tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence[Scalar]], ambient_dim: int) -> "Subspace":
        vecs = [tuple(_coerce(x) for x in v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise DimensionMismatchError(f"Vector of length {len(v)} in ambient dimension {ambient_dim}")
        if not vecs:
            return cls(ambient_dim, ())
        rows, _, r = rref(vecs)
        return cls(ambient_dim, tuple(tuple(row) for row in rows[:r]))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int, one: Scalar | None = None) -> "Subspace":
        one = Fraction(1) if one is None else one
        zero = zero_like(one)
        return cls(ambient_dim, tuple(tuple(one if i == j else zero for j in range(ambient_dim)) for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def pivots(self) -> List[int]:
        return [next(i for i, x in enumerate(v) if x != 0) for v in self.basis]

    def contains(self, v: Sequence[Scalar]) -> bool:
        if len(v) != self.ambient_dim:
            raise DimensionMismatchError(f"Vector of length {len(v)} in ambient dimension {self.ambient_dim}")
        if not self.basis:
            return all(x == 0 for x in v)
        return rank(list(self.basis) + [list(v)]) == self.dim

    def is_subspace_of(self, other: "Subspace") -> bool:
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatchError("Subspaces live in different ambient spaces")
        return all(other.contains(v) for v in self.basis)

    def coordinates(self, v: Sequence[Scalar]) -> List[Scalar] | None:
        """Coordinates of v in the rref basis, or None when v is outside."""
        if not self.basis:
            return [] if all(x == 0 for x in v) else None
        coords = [v[p] for p in self.pivots()]
        recon = [sum((c * b[i] for c, b in zip(coords, self.basis)), zero_like(coords[0])) for i in range(self.ambient_dim)]
        if any(a != b for a, b in zip(recon, v)):
            return None
        return coords


def nullspace(m: Sequence[Sequence[Scalar]], cols: int | None = None, *, one: Scalar | None = None) -> Subspace:
    """Basis of {v : m v = 0}, returned in canonical rref form."""
    ncols = cols if cols is not None else (len(m[0]) if m else 0)
    if m and len(m[0]) != ncols:
        raise DimensionMismatchError(f"Matrix has {len(m[0])} columns, expected {ncols}")
    one = _unit(m, one)
    zero = zero_like(one)
    if not m:
        return Subspace.full(ncols, one)
    rows, pivots, r = rref(m)
    free = [c for c in range(ncols) if c not in set(pivots)]
    vectors = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][f]
        vectors.append(v)
    return Subspace.span(vectors, ncols)


def orthogonal(sub: Subspace, *, one: Scalar | None = None) -> Subspace:
    """{w : w . v = 0 for all v in sub} for the standard bilinear form."""
    if not sub.basis:
        return Subspace.full(sub.ambient_dim, one if one is not None else Fraction(1))
    return nullspace(list(sub.basis), sub.ambient_dim, one=one)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError("Cannot add subspaces of different ambient dimension")
    return Subspace.span(list(a.basis) + list(b.basis), a.ambient_dim)


def subspace_intersect(a: Subspace, b: Subspace, *, one: Scalar | None = None) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError("Cannot intersect subspaces of different ambient dimension")
    if not a.basis or not b.basis:
        return Subspace.zero(a.ambient_dim)
    if one is None:
        one = one_like(a.basis[0][0])
    constraints = list(orthogonal(a, one=one).basis) + list(orthogonal(b, one=one).basis)
    if not constraints:
        return Subspace.full(a.ambient_dim, one)
    return nullspace(constraints, a.ambient_dim, one=one)


def extend_basis(base: Sequence[Sequence[Scalar]], candidates: Iterable[Sequence[Scalar]]) -> List[Vector]:
    """Greedily pick candidates that raise the rank of `base`, in the given order."""
    chosen: List[Vector] = []
    current = [list(v) for v in base]
    r = rank(current) if current else 0
    for cand in candidates:
        trial = current + [list(cand)]
        tr = rank(trial)
        if tr > r:
            chosen.append(tuple(cand))
            current = trial
            r = tr
    return chosen


def quotient_reps(big: Subspace, small: Subspace) -> List[Vector]:
    """Vectors of `big` whose cosets form a basis of big/small."""
    if not small.is_subspace_of(big):
        raise ContainmentError("quotient_reps: the smaller subspace is not contained in the bigger one")
    return extend_basis(small.basis, big.basis)


# -- plain matrix helpers --------------------------------------------------


def identity(n: int, one: Scalar | None = None) -> Matrix:
    one = Fraction(1) if one is None else one
    zero = zero_like(one)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence[Any]]) -> List[List[Any]]:
    return [list(col) for col in zip(*m)] if m else []


def _dot(xs: Sequence[Any], ys: Sequence[Any], zero: Any) -> Any:
    acc = zero
    for x, y in zip(xs, ys):
        if x != 0 and y != 0:
            acc = acc + x * y
    return acc


def mat_mul(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]]) -> List[List[Any]]:
    if a and b and len(a[0]) != len(b):
        raise DimensionMismatchError(f"Cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    bt = transpose(b)
    zero = zero_like(a[0][0]) if a and a[0] else Fraction(0)
    return [[_dot(row, col, zero) for col in bt] for row in a]


def inverse(m: Sequence[Sequence[Scalar]]) -> Matrix:
    n = len(m)
    if any(len(row) != n for row in m):
        raise DimensionMismatchError("Only square matrices can be inverted")
    one = _unit(m, None)
    aug = [list(row) + ident_row for row, ident_row in zip(m, identity(n, one))]
    rows, pivots, r = rref(aug)
    if r < n or pivots[:n] != list(range(n)):
        raise SingularMatrixError("Matrix is singular")
    return [row[n:] for row in rows[:n]]


def is_invertible(m: Sequence[Sequence[Scalar]]) -> bool:
    return bool(m) and rank(m) == len(m) == len(m[0])


def pivot_rows_inverse(columns: Sequence[Sequence[Scalar]]) -> Tuple[List[int], Matrix]:
    """For independent columns c_1..c_k of length N, pick k rows R where they are
    independent and return (R, inverse of the k x k block).

    coords = inverse . v[R] then recovers any v in the column span, and works
    for vectors with polynomial entries since only the block is inverted.
    """
    if not columns:
        return [], []
    rows_view = transpose(columns)  # N x k
    # Pivot rows of the column matrix are the pivot columns of its transpose.
    _, pivots, r = rref(transpose(rows_view))
    if r < len(columns):
        raise SingularMatrixError("Columns are linearly dependent")
    block = [list(rows_view[i]) for i in pivots]
    return pivots, inverse(block)
