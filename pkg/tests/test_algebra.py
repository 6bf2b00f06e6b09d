from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicomm.algebra import (
    Identity,
    Side,
    annihilator,
    change_basis,
    check_identity,
    fingerprint,
    is_bicommutative,
    is_commutative,
    is_two_step,
    multiply,
    nilpotency_index,
    power_chain,
)
from bicomm.errors import DimensionMismatchError, MustInstantiateError, SingularMatrixError

from .conftest import alg

B4_17 = "algebra B4_17 dim 4\ne1*e2 = e3\ne1*e3 = e4\n"


def test_identities(n01, heisenberg_like):
    assert is_bicommutative(n01)
    assert is_commutative(n01)
    assert is_two_step(n01)
    assert not is_commutative(heisenberg_like)
    assert is_bicommutative(heisenberg_like)


def test_associative_non_bicommutative():
    # upper triangular 2x2 matrix units: e11*e12 = e12, e12*e22 = e12
    a = alg("algebra T dim 3\ne1*e1 = e1\ne1*e2 = e2\ne2*e3 = e2\ne3*e3 = e3\n")
    res = check_identity(a, Identity.RIGHT_COMMUTATIVE)
    assert not res.passed
    assert res.violations
    assert nilpotency_index(a) is None


def test_power_chain_and_index(n01):
    chain = power_chain(n01)
    assert [s.dim for s in chain] == [4, 1, 0]
    assert nilpotency_index(n01) == 3
    b = alg(B4_17)
    assert nilpotency_index(b) == 4
    assert not is_two_step(b)


def test_annihilators(heisenberg_like):
    a = alg("algebra L dim 3\ne1*e2 = e3\n")
    assert annihilator(a, Side.LEFT).dim == 2
    assert annihilator(a, Side.RIGHT).dim == 2
    assert annihilator(a).dim == 1
    assert annihilator(heisenberg_like).dim == 1


def test_parametric_algebra_must_be_instantiated():
    a = alg("algebra P dim 2\nparam alpha\ne1*e1 = alpha e2\n")
    with pytest.raises(MustInstantiateError):
        nilpotency_index(a)
    with pytest.raises(MustInstantiateError):
        a.reduce_mod(5)


def test_change_basis_rejects_singular(n01):
    with pytest.raises(SingularMatrixError):
        change_basis(n01, [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def test_fingerprint_fields(n01):
    fp = fingerprint(n01)
    assert fp.dim == 4
    assert fp.dim_a2 == 1
    assert fp.nilindex == 3
    assert fp.dim_ann == 3
    assert fp.dim_h2 == 10
    assert fp.dim_h2_com == 6
    assert fp.commutative
    assert fp == fingerprint(alg("algebra M dim 4\ne1*e1 = e2\n"))


entries = st.fractions(min_value=-3, max_value=3, max_denominator=2)


@st.composite
def unitriangular(draw, n):
    """Invertible by construction: nonzero diagonal, zeros below."""
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = draw(st.sampled_from([Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 3)]))
        for j in range(i + 1, n):
            m[i][j] = draw(entries)
    perm = draw(st.permutations(range(n)))
    return [m[p] for p in perm]


@settings(max_examples=25, deadline=None)
@given(unitriangular(4))
def test_fingerprint_is_basis_independent(m):
    b = alg(B4_17)
    moved = change_basis(b, m)
    assert is_bicommutative(moved)
    assert fingerprint(moved) == fingerprint(b)


def test_multiply_is_bilinear(n01):
    assert multiply(n01, (1, 0, 0, 0), (1, 0, 0, 0)) == (0, 1, 0, 0)
    assert multiply(n01, (2, 1, 0, 0), (3, 0, 5, 0)) == (0, 6, 0, 0)
    assert multiply(n01, (0, 1, 1, 1), (1, 1, 1, 1)) == (0, 0, 0, 0)
    with pytest.raises(DimensionMismatchError):
        multiply(n01, (1, 0), (1, 0, 0, 0))
