from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicomm.errors import MalformedInputError
from bicomm.expr import parse_poly
from bicomm.poly import MultiPoly, poly_normalize, poly_substitute


def test_normalize_merges_and_drops():
    p = poly_normalize([((1, 0), 2), ((1, 0), -2), ((0, 2), Fraction(1, 3))], ("x", "y"))
    assert p == parse_poly("y^2/3")
    assert poly_normalize([((0, 0), 0)], ("x", "y")).is_zero()
    with pytest.raises(MalformedInputError):
        poly_normalize([((1,), 1)], ("x", "y"))


def test_substitute_partial_and_full():
    p = parse_poly("x^2 y - 3 y + 1")
    q = poly_substitute(p, {"x": 2})
    assert q == parse_poly("y + 1")
    assert poly_substitute(p, {"x": 2, "y": -1}) == 0
    assert poly_substitute(Fraction(5), {"x": 1}) == 5


def test_equality_ignores_variable_order():
    a = parse_poly("x y + z", ("z", "y", "x"))
    b = parse_poly("y x + z", ("x", "y"))
    assert a == b
    assert hash(a) == hash(b)
    assert MultiPoly.variable("x") - MultiPoly.variable("x") == 0


poly_text = st.sampled_from(["x", "y", "x^2", "x y", "2", "-1/2", "y^3 - x", "(x+y)^2"])


@settings(max_examples=60, deadline=None)
@given(poly_text, poly_text, st.integers(-3, 3), st.integers(-3, 3))
def test_substitution_is_a_ring_map(s, t, xv, yv):
    p, q = parse_poly(s), parse_poly(t)
    env = {"x": xv, "y": yv}

    def ev(r):
        return Fraction(poly_substitute(r, env)) if isinstance(r, MultiPoly) else Fraction(r)

    assert ev(p * q) == ev(p) * ev(q)
    assert ev(p + q) == ev(p) + ev(q)
    assert ev(p - q) == ev(p) - ev(q)
