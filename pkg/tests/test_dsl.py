from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicomm.algebra import Algebra
from bicomm.dsl import parse_algebra, parse_bindings, parse_cocycle, parse_constraints, serialize_algebra
from bicomm.errors import DslSyntaxError, IrrationalValueError, MalformedInputError, UnknownSymbolError
from bicomm.expr import eval_expr, free_symbols, parse_expr


def test_parse_parametric_algebra():
    parsed = parse_algebra(
        """
        # N08 family
        algebra N08 dim 4
        param alpha != 1
        e1*e1 = e3
        e1*e2 = e4
        e2*e1 = -alpha e3
        e2*e2 = -e4
        """
    )
    a = parsed.algebra
    assert a.name == "N08"
    assert a.params == ("alpha",)
    assert [str(c) for c in parsed.constraints] == ["alpha != 1"]
    assert a.is_parametric()
    concrete = a.substitute({"alpha": 2})
    assert concrete.c[1][0][2] == -2
    assert concrete.c[0][1][3] == 1


def test_syntax_errors_carry_line_numbers():
    with pytest.raises(DslSyntaxError) as exc:
        parse_algebra("algebra X dim 2\ne1*e1 = e2\ne1*e1 = e2\n")
    assert exc.value.line == 3
    with pytest.raises(DslSyntaxError) as exc:
        parse_algebra("algebra X dim 2\ne1*e3 = e2\n")
    assert exc.value.line == 2
    with pytest.raises(DslSyntaxError):
        parse_algebra("dim 2\n")


def test_products_in_any_order():
    a = parse_algebra("algebra X dim 3\ne2*e2 = e3\ne1*e1 = e3\ne1*e2 = 2 e3\n").algebra
    assert a.c[1][1][2] == 1
    assert a.c[0][0][2] == 1
    assert a.c[0][1][2] == 2
    with pytest.raises(DslSyntaxError) as exc:
        parse_algebra("algebra X dim 3\ne2*e2 = e3\ne1*e1 = e3\ne2*e2 = e1\n")
    assert exc.value.line == 4


def test_unknown_coefficient_symbol():
    with pytest.raises(UnknownSymbolError):
        parse_algebra("algebra X dim 2\ne1*e1 = beta e2\n")


def test_parse_cocycle_pairs_and_nablas():
    forms = parse_cocycle("D(1,2)+D(2,1); 3 D(2,2)", {}, 2)
    assert len(forms) == 2
    assert forms[0] == [[0, 1], [1, 0]]
    assert forms[1] == [[0, 0], [0, 3]]
    nablas = {"N1": [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(0)]]}
    (theta,) = parse_cocycle("alpha N1", nablas, 2, env={"alpha": Fraction(-1, 2)})
    assert theta[0][0] == Fraction(-1, 2)
    with pytest.raises(UnknownSymbolError):
        parse_cocycle("N2", nablas, 2)
    with pytest.raises(MalformedInputError):
        parse_cocycle("D(3,1)", {}, 2)


def test_constraints_and_bindings():
    cs = parse_constraints("alpha != 0, (alpha,beta) != (1,-1)")
    assert cs[0].violated({"alpha": 0})
    assert not cs[1].violated({"alpha": 1})
    assert cs[1].violated({"alpha": 1, "beta": -1})
    assert parse_bindings("alpha=2, beta=-1/3") == {"alpha": 2, "beta": Fraction(-1, 3)}
    with pytest.raises(MalformedInputError):
        parse_bindings("alpha")


def test_expressions():
    assert eval_expr("(-1+sqrt(1-4lam))/2", {"lam": -2}) == 1
    assert eval_expr("2 t^2 - 1/2", {"t": 3}) == Fraction(35, 2)
    assert free_symbols(parse_expr("x y + sqrt(z)")) >= {"x", "y", "z"}
    with pytest.raises(IrrationalValueError):
        eval_expr("sqrt(2)", {})


coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@st.composite
def algebras(draw):
    n = draw(st.integers(min_value=1, max_value=4))
    products = {}
    for i in range(n):
        for j in range(n):
            vec = {k: c for k in range(n) if (c := draw(coeffs)) != 0} if draw(st.booleans()) else {}
            if vec:
                products[(i, j)] = vec
    return Algebra.from_products(n, products, "R")


@settings(max_examples=50, deadline=None)
@given(algebras())
def test_serialize_then_parse_is_identity(a):
    back = parse_algebra(serialize_algebra(a)).algebra
    assert back.dim == a.dim
    assert back.c == a.c
