from __future__ import annotations

from fractions import Fraction

import pytest

from bicomm.catalog import (
    CATALOG_ENV,
    Catalog,
    catalog_path,
    load_catalog,
    parse_isonotes,
    parse_reps,
    rep_forms,
    sample_bindings,
)
from bicomm.dsl import parse_constraints
from bicomm.errors import CatalogError, ExcludedValueError, MalformedInputError, MustInstantiateError


def test_catalog_layout(catalog):
    assert "N01" in catalog
    assert "B4_03" not in catalog
    assert [e.name for e in catalog.variants_of("N14")] == ["N14_0"]
    assert catalog["N14_0"].variant_bind == {"alpha": 0}
    assert all(not e.variant_of for e in catalog.primary())
    assert catalog.notes


def test_variant_resolution(catalog):
    assert catalog.resolve("N14", {"alpha": 0}).name == "N14_0"
    assert catalog.resolve("N04", {"alpha": 0}).name == "N04_0"
    assert catalog.resolve("N14", {"alpha": 3}).name == "N14"
    with pytest.raises(ExcludedValueError):
        catalog.instantiate("N08", {"alpha": 1}, strict=True)
    assert catalog.instantiate("N08", {"alpha": 1}).name == "N08_1"
    with pytest.raises(MustInstantiateError):
        catalog.instantiate("N14", {})


def test_alias_is_not_an_owner(catalog):
    entry, rep = catalog.find_rep("B104")
    assert entry.name == "N14"
    assert not rep.alias
    with pytest.raises(CatalogError):
        catalog.find_rep("B104^0")


def test_representative_parameters(catalog):
    entry, rep = catalog.find_rep("B11")
    assert rep.free_params(entry.params) == ("lam",)
    assert rep.sample_overrides["lam"] == (0, -2, -6)
    entry, rep = catalog.find_rep("B04")
    assert rep.coefficient_symbols() == ["alpha"]
    assert rep.s == 1
    entry, rep = catalog.find_rep("B171")
    assert rep.s == 2
    assert rep.nabla_symbols() == ["N2", "N5"]


def test_rep_forms(catalog):
    entry, rep = catalog.find_rep("B04")
    (theta,) = rep_forms(entry, rep, {"alpha": Fraction(2)})
    # N1 + N4 + 2 N7 + N9 = D12+D21 + D33 + 2 D21 + D41
    assert theta[0][1] == 1
    assert theta[1][0] == 3
    assert theta[2][2] == 1
    assert theta[3][0] == 1


def test_parse_reps_fields():
    (rep,) = parse_reps("B99 | N1 + beta N2 | arity=2 | where beta != 0 | bind alpha=1/2 | samples beta: 4, 5\n", "X")
    assert rep.arity == 2
    assert rep.bindings == {"alpha": Fraction(1, 2)}
    assert str(rep.constraints[0]) == "beta != 0"
    assert rep.free_params(("alpha", "gamma")) == ("gamma", "beta")
    with pytest.raises(MalformedInputError):
        parse_reps("B99 | N1\n", "X")
    with pytest.raises(MalformedInputError):
        parse_reps("B99 | N1 | arity=0 | colour\n", "X")


def test_sample_points_are_deterministic():
    cs = parse_constraints("alpha != 2")
    points = sample_bindings(["alpha", "beta"], cs, [2, 3, -1, 5])
    assert points == [{"alpha": 3, "beta": 3}, {"alpha": -1, "beta": -1}]
    assert points == sample_bindings(["alpha", "beta"], cs, [2, 3, -1, 5])
    assert sample_bindings([], cs, [2, 3]) == [{}]
    with pytest.raises(ExcludedValueError):
        sample_bindings(["alpha"], cs, [2])


def test_family_needs_two_sample_points():
    cs = parse_constraints("alpha != 2, alpha != 3, alpha != -1")
    with pytest.raises(ExcludedValueError):
        sample_bindings(["alpha"], cs, [2, 3, -1, 5])
    assert sample_bindings(["alpha"], cs, [2, 3, -1, 5], per_family=1) == [{"alpha": 5}]
    joint = parse_constraints("(alpha,beta) != (2,3)")
    with pytest.raises(ExcludedValueError):
        sample_bindings(["alpha", "beta"], joint, [2, 3], overrides={"beta": [2, 3]})


def test_joint_exclusions_drop_points():
    cs = parse_constraints("(alpha,beta) != (2,3)")
    points = sample_bindings(["alpha", "beta"], cs, [2, 3, -1, 5], per_family=4)
    assert {"alpha": 2, "beta": 3} not in points
    assert len(points) == 3


def test_isonotes_format():
    (note,) = parse_isonotes("B57(alpha=0, beta=0, gamma=g) ~ B185(alpha=0, beta=1/g) | where g != 0  # comment\n")
    assert note.left.rep == "B57"
    assert note.right.bindings == (("alpha", "0"), ("beta", "1/g"))
    assert note.variables() == ["g"]
    assert str(note.constraints[0]) == "g != 0"
    assert note.name == "B57(alpha=0, beta=0, gamma=g) ~ B185(alpha=0, beta=1/g)"
    with pytest.raises(MalformedInputError):
        parse_isonotes("B1 = B2\n")


def test_note_with_unknown_rep_is_rejected(catalog):
    notes = parse_isonotes("B01 ~ B999\n")
    with pytest.raises(CatalogError):
        Catalog(list(catalog), notes)


def test_catalog_path_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv(CATALOG_ENV, str(tmp_path))
    assert catalog_path() == tmp_path
    assert catalog_path(tmp_path / "other") == tmp_path / "other"
    monkeypatch.delenv(CATALOG_ENV)
    assert catalog_path().name == "catalog"


def test_small_catalog_from_disk(tmp_path):
    d = tmp_path / "X01"
    d.mkdir()
    (d / "base.alg").write_text("algebra X01 dim 2\ne1*e1 = e2\n", encoding="utf-8")
    (d / "nablas.txt").write_text("N1 = D(1,2)\nN2 = D(2,1)\n", encoding="utf-8")
    (d / "reps.txt").write_text("X1 | N2 | arity=0\n", encoding="utf-8")
    (d / "expect.txt").write_text("h2_bicom=2\nnilindex=3\n", encoding="utf-8")
    cat = load_catalog(tmp_path)
    assert len(cat) == 1
    assert cat["X01"].expected_int("h2_bicom") == 2
    (d / "reps.txt").write_text("X1 | N3 | arity=0\n", encoding="utf-8")
    with pytest.raises(CatalogError):
        load_catalog(tmp_path)
    with pytest.raises(CatalogError):
        load_catalog(tmp_path / "missing")
