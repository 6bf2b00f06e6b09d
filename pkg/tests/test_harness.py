from __future__ import annotations

import pytest

from bicomm.algebra import direct_sum_zero, fingerprint, nilpotency_index
from bicomm.catalog import Catalog, parse_isonotes, parse_reps
from bicomm.cohomology import ExtensionSpec, zero_form
from bicomm.harness import (
    build_extension,
    check_extension,
    count_theorem_a,
    distinguish_all,
    documented_defect,
    label,
    regenerate_extensions,
    render_vector,
    rep_points,
    run_suites,
    verify_actions,
    verify_h2_tables,
    verify_iso_notes,
)
from bicomm.report import Status


def _items(report):
    return {it.name: it for it in report.items}


def _sub(catalog, *names):
    return Catalog([catalog[n] for n in names])


def test_label():
    assert label("B04", {}) == "B04"
    assert label("B04", {"alpha": 2, "beta": -1}) == "B04[alpha=2,beta=-1]"


def test_counts_report_the_published_discrepancy(catalog, cfg):
    report = count_theorem_a(catalog, cfg)
    items = _items(report)
    assert items["arity_2"].status == Status.PASS
    assert items["arity_2"].data["found"] == 20
    assert items["arity_1"].data["found"] == 78
    assert items["arity_0"].data["found"] == 106
    assert items["arity_0"].status == Status.FAIL
    assert items["arity_3"].data["found"] == 2
    assert items["arity_4"].status == Status.FAIL
    assert items["names"].data["distinct"] == 207
    assert len(report.notes) == 3
    assert report.failed


def test_h2_tables_on_parameter_split(catalog, cfg):
    report = verify_h2_tables(_sub(catalog, "N14", "N14_0", "B4_17", "B3s_02"), cfg)
    assert not report.failed
    items = _items(report)
    assert items["N14[alpha=2]"].data["h2"] == 6
    assert items["N14[alpha=3]"].data["h2"] == 6
    assert items["N14_0"].data["h2"] == 7
    assert items["B4_17"].data["h2"] == 5
    assert items["B3s_02"].data["h2"] == 3


def test_actions_sweep(catalog, cfg):
    report = verify_actions(_sub(catalog, "N01", "N08", "N08_1", "B4_19"), cfg)
    assert report.items
    assert not report.failed


def test_rep_points_merge_bindings(catalog, cfg):
    entry, rep = catalog.find_rep("B11")
    assert rep_points(entry, rep, cfg) == [{"lam": 0}, {"lam": -2}]
    entry, rep = catalog.find_rep("B104")
    assert [p["alpha"] for p in rep_points(entry, rep, cfg)] == [2, 3]


def test_zero_cocycle_control(n01):
    problems, _ = check_extension(ExtensionSpec.of(n01, [zero_form(4)]))
    assert any(p.startswith("split") for p in problems)
    assert any("2-step" in p for p in problems)


def test_regenerate_from_n01(catalog, cfg, tmp_path):
    report, generated = regenerate_extensions(_sub(catalog, "N01"), cfg, emit_dir=tmp_path)
    assert not report.failed
    b01 = next(g for g in generated if g.rep.name == "B01")
    assert b01.algebra.dim == 5
    assert nilpotency_index(b01.algebra) == 4
    assert (tmp_path / "B01.alg").exists()
    assert any(p.name.startswith("B04_alpha=2") for p in tmp_path.iterdir())

    split = direct_sum_zero(catalog["N01"].algebra, 1)
    assert fingerprint(b01.algebra) != fingerprint(split)

    dist = distinguish_all(generated, cfg)
    assert not dist.failed
    assert "distinct fingerprints" in dist.notes[-1]


def test_regenerate_two_cocycles(catalog, cfg):
    entry, rep = catalog.find_rep("B171")
    spec = build_extension(catalog, entry, rep, {})
    problems, ext = check_extension(spec)
    assert problems == []
    assert ext.dim == 5
    assert nilpotency_index(ext) == 4


def test_iso_notes(catalog, cfg):
    notes = parse_isonotes(
        "B12(lam=1/4) ~ B11(lam=1/4)\n"
        "B105(alpha=-2) ~ B104(alpha=-2)\n"
        "B01 ~ B171\n"
    )
    report = verify_iso_notes(catalog, cfg, notes)
    items = _items(report)
    same = items["B12(lam=1/4) ~ B11(lam=1/4)"]
    assert same.status == Status.PASS
    assert same.data["result"] in ("certified", "fingerprint-consistent")
    assert items["B105(alpha=-2) ~ B104(alpha=-2)"].status == Status.PASS
    wrong = items["B01 ~ B171"]
    assert wrong.status == Status.FAIL
    assert wrong.data["result"] == "failed"


def test_run_suites(catalog, cfg):
    (report,) = run_suites(["counts"], catalog, cfg)
    assert report.suite == "counts"
    with pytest.raises(ValueError):
        run_suites(["bogus"], catalog, cfg)


def test_render_vector():
    assert render_vector((0, 0, 1, 1)) == "e3+e4"
    assert render_vector((2, 0, -1, 0)) == "2e1-e3"
    assert render_vector((0, 0)) == "0"


def test_documented_defect_must_reproduce():
    (rep,) = parse_reps("B65 | N3-N4 | arity=0 | defect split: theta vanishes on e3+e4\n", "N08_1")
    assert rep.defect == "split: theta vanishes on e3+e4"
    status, reason = documented_defect(rep, ["split: common annihilator of the cocycles meets Ann(A), witness e3+e4"])
    assert status == Status.SKIP
    assert "witness e3+e4" in reason
    assert documented_defect(rep, [])[0] == Status.FAIL
    assert documented_defect(rep, ["not nilpotent"])[0] == Status.FAIL


def test_actions_over_whole_catalog(catalog, cfg):
    report = verify_actions(catalog, cfg)
    assert not report.failed, [(it.name, it.reason) for it in report.items if it.status == Status.FAIL]
    items = _items(report)
    assert items["B4_11/phi"].status == Status.PASS
    assert items["N13/phi2"].status == Status.PASS


def test_extensions_over_whole_catalog(catalog, cfg):
    report, generated = regenerate_extensions(catalog, cfg)
    assert not report.failed, [(it.name, it.reason) for it in report.items if it.status == Status.FAIL]
    items = _items(report)
    for name in ("B65", "B66", "B67", "B68[beta=2]", "B69[beta=3]", "B84"):
        assert items[name].status == Status.SKIP
        assert "witness e3+e4" in items[name].reason
    assert items["B70"].status == Status.PASS
    assert not any(g.rep.name == "B84" for g in generated)


def test_documented_note_defect(catalog, cfg):
    notes = parse_isonotes(
        "B60(alpha=1, beta=0) ~ B93 | defect fingerprints: dim Ann differs\n"
        "B105(alpha=-2) ~ B104(alpha=-2) | defect fingerprints: none\n"
    )
    assert notes[0].defect == "fingerprints: dim Ann differs"
    items = _items(verify_iso_notes(catalog, cfg, notes))
    assert items["B60(alpha=1, beta=0) ~ B93"].status == Status.SKIP
    assert items["B105(alpha=-2) ~ B104(alpha=-2)"].status == Status.FAIL


@pytest.mark.slow
def test_iso_notes_over_whole_catalog(catalog, cfg):
    report = verify_iso_notes(catalog, cfg)
    assert not report.failed, [(it.name, it.reason) for it in report.items if it.status == Status.FAIL]
    assert report.count(Status.SKIP) == 4
