from __future__ import annotations

from fractions import Fraction

import pytest

from bicomm.config import AppConfig, load_config
from bicomm.errors import ConfigError
from bicomm.report import Report, Status, export_table, natural_key, write_report_markdown


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg == AppConfig()
    assert cfg.sampling.values == (2, 3, -1, 5)
    assert cfg.counts.by_arity() == {0: 107, 1: 77, 2: 20, 3: 3}


def test_partial_yaml_keeps_defaults(tmp_path):
    p = tmp_path / "cfg.yaml"
    p.write_text("sampling:\n  values: [1/2, 7]\nsearch:\n  primes: [11]\nreport:\n  export_csv: yes\n", encoding="utf-8")
    cfg = load_config(p)
    assert cfg.sampling.values == (Fraction(1, 2), Fraction(7))
    assert cfg.sampling.per_family == 2
    assert cfg.search.primes == (11,)
    assert cfg.search.node_limit == 200_000
    assert cfg.report.export_csv is True
    assert cfg.report.export_excel is False


def test_shipped_config_matches_defaults():
    from pathlib import Path

    shipped = Path(__file__).resolve().parent.parent / "config.yaml"
    assert load_config(shipped) == AppConfig()


@pytest.mark.parametrize(
    "text",
    [
        "search:\n  primes: [4, 5]\n",
        "sampling:\n  values: [2]\n",
        "sampling: 3\n",
        "sampling:\n  values: [1.5, 2]\n",
        "- a\n- b\n",
        "search: [\n",
    ],
)
def test_bad_config(tmp_path, text):
    p = tmp_path / "bad.yaml"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(p)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


def _report() -> Report:
    rep = Report("tables")
    rep.add("N10", Status.PASS, h2=8)
    rep.add("N9", Status.FAIL, "dim H2 = 7, table says 8", h2=7)
    rep.add("N04_0", Status.SKIP, "symbolic")
    rep.notes.append("two cases")
    return rep.sorted()


def test_report_ordering_and_lines():
    rep = _report()
    assert [it.name for it in rep.items] == ["N04_0", "N9", "N10"]
    assert natural_key("B9") < natural_key("B10")
    assert rep.failed
    kv = rep.key_values()
    assert kv[:3] == ["tables.passed=1", "tables.failed=1", "tables.skipped=1"]
    assert "tables.N9.status=fail" in kv
    assert "tables.N10.h2=8" in kv
    human = rep.human_lines()
    assert not any("N10" in line for line in human)
    assert any(line.strip().startswith("FAIL N9") for line in human)
    assert human[-1] == "[tables] 1 passed, 1 failed, 1 skipped"
    assert any("N10" in line for line in rep.human_lines(verbose=True))


def test_markdown_and_table_export(tmp_path):
    rep = _report()
    md = tmp_path / "report.md"
    write_report_markdown([rep], md)
    text = md.read_text(encoding="utf-8")
    assert "## tables" in text
    assert "| N9 | fail | dim H2 = 7, table says 8 |" in text
    csv = tmp_path / "report.csv"
    xlsx = tmp_path / "report.xlsx"
    export_table([rep], csv_path=csv, xlsx_path=xlsx)
    header = csv.read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("suite,item,status,reason")
    assert xlsx.exists()
