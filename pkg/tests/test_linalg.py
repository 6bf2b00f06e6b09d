from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicomm.errors import ContainmentError, DimensionMismatchError, MalformedInputError, NonReducibleError, SingularMatrixError
from bicomm.linalg import Subspace, identity, inverse, mat_mul, nullspace, quotient_reps, rank, rref, subspace_intersect
from bicomm.scalars import FpElem, format_rational, is_prime, mod_p_reduce, parse_rational

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def matrices(rows: int, cols: int):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def test_parse_rational():
    assert parse_rational("-3/6") == Fraction(-1, 2)
    assert parse_rational(" 7 ") == Fraction(7)
    assert format_rational(Fraction(6, 4)) == "3/2"
    with pytest.raises(MalformedInputError):
        parse_rational("1.5")
    with pytest.raises(MalformedInputError):
        parse_rational("1/0")


def test_fp_arithmetic():
    a = FpElem(3, 7)
    assert a * a.inverse() == FpElem(1, 7)
    assert a / 3 == 1
    assert FpElem(6, 7).lift() == -1
    assert mod_p_reduce(Fraction(1, 2), 7) == FpElem(4, 7)
    with pytest.raises(NonReducibleError):
        mod_p_reduce(Fraction(1, 7), 7)
    with pytest.raises(ZeroDivisionError):
        FpElem(0, 5).inverse()
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_rref_and_rank():
    rows, pivots, r = rref([[2, 4], [1, 2]])
    assert r == 1
    assert pivots == [0]
    assert rows[0] == [1, 2]
    assert rank([[1, 0, 0], [0, 1, 0], [1, 1, 0]]) == 2


def test_singular_inverse():
    with pytest.raises(SingularMatrixError):
        inverse([[1, 2], [2, 4]])


def test_nullspace_over_fp():
    one = FpElem(1, 5)
    m = [[one, FpElem(2, 5)]]
    ns = nullspace(m, one=one)
    assert ns.dim == 1
    v = ns.basis[0]
    assert v[0] + 2 * v[1] == 0


@settings(max_examples=60, deadline=None)
@given(matrices(3, 4))
def test_rank_nullity(m):
    ns = nullspace(m, 4)
    assert rank(m) + ns.dim == 4
    for v in ns.basis:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in m)


@settings(max_examples=60, deadline=None)
@given(matrices(3, 3))
def test_inverse_is_two_sided(m):
    if rank(m) < 3:
        with pytest.raises(SingularMatrixError):
            inverse(m)
        return
    inv = inverse(m)
    assert mat_mul(m, inv) == identity(3)
    assert mat_mul(inv, m) == identity(3)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=4))
def test_span_is_canonical(vectors):
    a = Subspace.span(vectors, 4)
    b = Subspace.span(list(reversed(vectors)) + vectors, 4)
    assert a == b
    for v in vectors:
        assert a.contains(v)
        assert a.coordinates(v) is not None


def test_quotient_reps():
    big = Subspace.full(2)
    small = Subspace.span([[1, 0]], 2)
    assert quotient_reps(big, small) == [(0, 1)]
    assert quotient_reps(small, small) == []
    with pytest.raises(ContainmentError):
        quotient_reps(small, Subspace.span([[0, 1]], 2))


def test_subspace_intersect():
    a = Subspace.span([[1, 0, 0], [0, 1, 0]], 3)
    b = Subspace.span([[0, 1, 0], [0, 0, 1]], 3)
    assert subspace_intersect(a, b) == Subspace.span([[0, 1, 0]], 3)
    assert subspace_intersect(a, a) == a
    lines = subspace_intersect(Subspace.span([[1, 1]], 2), Subspace.span([[1, -1]], 2))
    assert lines.dim == 0
    with pytest.raises(DimensionMismatchError):
        subspace_intersect(a, Subspace.full(2))
