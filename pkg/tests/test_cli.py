from __future__ import annotations

import pytest

from bicomm.cli import main
from bicomm.dsl import parse_algebra

N01 = "algebra N01 dim 4\ne1*e1 = e2\n"
N02 = "algebra N02 dim 4\ne1*e1 = e3\ne2*e2 = e4\n"
N14 = "algebra N14 dim 4\nparam alpha != 0\ne1*e2 = e4\ne2*e1 = alpha e4\ne2*e2 = e3\n"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in (("n01", N01), ("n02", N02), ("n14", N14)):
        p = tmp_path / f"{name}.alg"
        p.write_text(text, encoding="utf-8")
        out[name] = str(p)
    return out


def _kv(text: str) -> dict:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_check(files, capsys):
    assert main(["--porcelain", "check", files["n01"]]) == 0
    kv = _kv(capsys.readouterr().out)
    assert kv == {"identity.right": "pass", "identity.left": "pass"}
    assert main(["check", files["n02"], "--identity", "commutative"]) == 0


def test_h2_with_binding(files, capsys):
    assert main(["--porcelain", "h2", files["n14"], "--bind", "alpha=3"]) == 0
    assert _kv(capsys.readouterr().out)["dim_h2"] == "6"
    assert main(["--porcelain", "h2", files["n01"], "--commutative"]) == 0
    kv = _kv(capsys.readouterr().out)
    assert kv["dim_h2"] == "10"
    assert kv["dim_h2_com"] == "6"


def test_extend_writes_algebra(files, tmp_path, capsys):
    out = tmp_path / "B01.alg"
    code = main(["--porcelain", "extend", files["n01"], "--cocycle", "D(1,4)+D(4,1)+D(3,3)+D(2,1)", "-o", str(out)])
    assert code == 0
    assert _kv(capsys.readouterr().out)["nonsplit"] == "true"
    ext = parse_algebra(out.read_text(encoding="utf-8")).algebra
    assert ext.name == "B01"
    assert ext.dim == 5


def test_fingerprint_and_distinguish(files, capsys):
    assert main(["--porcelain", "fingerprint", files["n01"]]) == 0
    assert _kv(capsys.readouterr().out)["dim_h2"] == "10"
    assert main(["distinguish", files["n01"], files["n02"]]) == 0
    assert "not isomorphic" in capsys.readouterr().out
    assert main(["--porcelain", "distinguish", files["n01"], files["n01"]]) == 0
    assert _kv(capsys.readouterr().out)["distinct"] == "false"


def test_aut_count(files, capsys, tmp_path):
    assert main(["--porcelain", "aut-count", files["n01"], "--prime", "2"]) == 0
    assert _kv(capsys.readouterr().out)["count"] == "192"
    assert main(["aut-count", files["n01"], "--prime", "4"]) == 2
    cfg = tmp_path / "tight.yaml"
    cfg.write_text("search:\n  work_limit: 1\n", encoding="utf-8")
    assert main(["--config", str(cfg), "aut-count", files["n01"], "--prime", "13"]) == 1


def test_isosearch(files, capsys):
    assert main(["isosearch", files["n01"], files["n01"], "--prime", "5", "--prime", "7"]) == 0
    assert main(["--porcelain", "isosearch", files["n01"], files["n02"], "--prime", "5"]) == 1
    assert _kv(capsys.readouterr().out)["p5.found"] == "false"


def test_verify_counts(tmp_path, capsys):
    out = tmp_path / "reports" / "counts.md"
    assert main(["--porcelain", "verify", "counts", "--out", str(out)]) == 1
    kv = _kv(capsys.readouterr().out)
    assert kv["counts.arity_2.status"] == "pass"
    assert kv["counts.names.distinct"] == "207"
    assert "## counts" in out.read_text(encoding="utf-8")


def test_input_and_config_errors(files, tmp_path, capsys):
    assert main(["verify", "counts", "--catalog", str(tmp_path / "nowhere")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("search:\n  primes: [6]\n", encoding="utf-8")
    assert main(["--config", str(bad), "check", files["n01"]]) == 2
    assert main(["check", str(tmp_path / "missing.alg")]) == 2
    assert "error:" in capsys.readouterr().err


def test_verify_counts_as_csv(tmp_path):
    out = tmp_path / "counts.csv"
    assert main(["--porcelain", "verify", "counts", "--out", str(out)]) == 1
    header = out.read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("suite,item,status,reason")
    assert not (tmp_path / "counts.md").exists()
