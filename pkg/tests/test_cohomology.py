from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bicomm.algebra import Algebra, annihilator, is_bicommutative, is_two_step, nilpotency_index
from bicomm.cohomology import (
    ExtensionSpec,
    central_extension,
    check_generators,
    coboundary_forms,
    coboundary_space,
    cocycle_space,
    extension_annihilator_law,
    h2,
    is_cocycle,
    nonsplit_check,
    render_form,
    ts_check,
    zero_form,
)
from bicomm.dsl import parse_cocycle
from bicomm.errors import DimensionMismatchError, InvalidSpecError

from .conftest import alg


def test_h2_of_n01(n01):
    coh = h2(n01)
    assert coh.b2.dim == 1
    assert coh.dim_h2 == 10
    assert coh.dim_h2_com == 6
    assert coh.z2.dim == 11


def test_h2_of_small_tables():
    b4_17 = alg("algebra B4_17 dim 4\ne1*e2 = e3\ne1*e3 = e4\n")
    assert h2(b4_17).dim_h2 == 5
    b3s_02 = alg("algebra B3s_02 dim 3\ne1*e1 = e3\ne2*e2 = e3\n")
    coh = h2(b3s_02)
    assert coh.dim_h2 == 3
    gens = check_generators(coh, parse_cocycle("D(1,2); D(2,1); D(2,2)", {}, 3))
    assert gens.in_z2
    assert gens.span_dim == 3


def test_h2_depends_on_parameter():
    n14 = alg("algebra N14 dim 4\nparam alpha\ne1*e2 = e4\ne2*e1 = alpha e4\ne2*e2 = e3\n")
    assert h2(n14.substitute({"alpha": 3})).dim_h2 == 6
    assert h2(n14.substitute({"alpha": 0})).dim_h2 == 7


def test_generator_outside_z2_is_reported(n01):
    coh = h2(n01)
    gens = check_generators(coh, parse_cocycle("D(2,1); D(1,2)", {}, 4))
    assert gens.in_z2
    b4_17 = alg("algebra B4_17 dim 4\ne1*e2 = e3\ne1*e3 = e4\n")
    gens = check_generators(h2(b4_17), parse_cocycle("D(1,1); D(3,1)", {}, 4))
    assert not gens.in_z2
    assert gens.missing == [1]


def test_zero_cocycle_is_split(n01):
    spec = ExtensionSpec.of(n01, [zero_form(4)])
    res = nonsplit_check(spec)
    assert not res
    assert "dependent" in res.detail


def test_coboundary_is_split(n01):
    spec = ExtensionSpec.of(n01, parse_cocycle("D(1,1)", {}, 4))
    assert not nonsplit_check(spec)


def test_annihilator_component_is_split(n01):
    # e4 is annihilated by theta and by A
    spec = ExtensionSpec.of(n01, parse_cocycle("D(1,2)+D(2,1)+D(3,3)", {}, 4))
    assert not ts_check(spec)
    res = nonsplit_check(spec)
    assert not res
    assert "annihilator" in res.detail


def test_b01_extension(n01):
    forms = parse_cocycle("D(1,4)+D(4,1)+D(3,3)+D(2,1)", {}, 4)
    spec = ExtensionSpec.of(n01, forms)
    assert nonsplit_check(spec)
    assert extension_annihilator_law(spec)
    ext = central_extension(spec, name="B01")
    assert ext.dim == 5
    assert is_bicommutative(ext)
    assert not is_two_step(ext)
    assert nilpotency_index(ext) == 4
    assert annihilator(ext).dim == 1


def test_two_cocycle_extension_of_3dim():
    base = alg("algebra B3s_04_0 dim 3\ne1*e2 = e3\n")
    spec = ExtensionSpec.of(base, parse_cocycle("D(1,3); D(3,2)", {}, 3))
    assert spec.s == 2
    assert nonsplit_check(spec)
    assert extension_annihilator_law(spec)
    ext = central_extension(spec)
    assert ext.dim == 5
    assert is_bicommutative(ext)
    assert nilpotency_index(ext) == 4


def test_non_cocycle_is_rejected():
    base = alg("algebra B4_17 dim 4\ne1*e2 = e3\ne1*e3 = e4\n")
    (theta,) = parse_cocycle("D(3,1)", {}, 4)
    assert not is_cocycle(base, theta)
    with pytest.raises(InvalidSpecError):
        central_extension(ExtensionSpec.of(base, [theta]))
    with pytest.raises(DimensionMismatchError):
        ExtensionSpec.of(base, [[[0, 0], [0, 0]]])
    with pytest.raises(InvalidSpecError):
        ExtensionSpec.of(base, [])


def test_render_form_parses_back():
    theta = parse_cocycle("D(1,2) - 2 D(2,1) + 1/2 D(3,3)", {}, 3)[0]
    assert parse_cocycle(render_form(theta), {}, 3)[0] == theta
    assert render_form(zero_form(2)) == "0"


small = st.fractions(min_value=-2, max_value=2, max_denominator=2)


@st.composite
def two_step_algebras(draw):
    """Products of e1, e2 land in span(e3, e4), which is central."""
    products = {}
    for i in range(2):
        for j in range(2):
            products[(i, j)] = {2: draw(small), 3: draw(small)}
    return Algebra.from_products(4, products, "S")


@settings(max_examples=30, deadline=None)
@given(two_step_algebras())
def test_coboundaries_are_cocycles(a):
    coh = h2(a)
    assert coh.b2.is_subspace_of(coh.z2)
    assert coh.dim_h2 == coh.z2.dim - coh.b2.dim
    assert coh.dim_h2_com <= coh.dim_h2
    for f in coboundary_forms(a):
        assert is_cocycle(a, f)
    for f in coh.rep_forms():
        assert is_cocycle(a, f)
    assert coh.class_rank(coboundary_forms(a)) == 0


def test_spaces_of_b3s_01():
    a = alg("algebra B3s_01 dim 3\ne1*e1 = e2\n")
    z2, b2 = cocycle_space(a), coboundary_space(a)
    # theta(e1, e1) is the only coboundary direction
    assert b2.dim == 1
    assert b2.is_subspace_of(z2)
    assert z2.dim - b2.dim == 5
    assert h2(a).dim_h2_com == 3
