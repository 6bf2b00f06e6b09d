from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Sequence

from .algebra import BICOMMUTATIVE, Algebra, Identity, check_identity, fingerprint
from .catalog import CATALOG_ENV, load_catalog
from .cohomology import ExtensionSpec, central_extension, h2, nonsplit_check, render_form
from .config import AppConfig, load_config
from .dsl import ParsedAlgebra, parse_algebra, parse_bindings, parse_cocycle, serialize_algebra
from .errors import BicommError, ConfigError, MalformedInputError, WorkLimitError
from .harness import SUITES, run_suites
from .report import export_table, write_report_markdown
from .scalars import is_prime
from .symmetry import aut_enumerate_fp, iso_search_fp

log = logging.getLogger("bicomm")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bicomm",
        description="Central extensions of nilpotent bicommutative algebras: cohomology, extensions and catalog checks.",
    )
    p.add_argument("--config", default=None, help="Path to config YAML (defaults apply without one)")
    p.add_argument("--porcelain", action="store_true", help="Print only key=value lines")
    p.add_argument("-v", "--verbose", action="store_true", help="List passing items and log progress")

    sub = p.add_subparsers(dest="cmd", required=True)

    s_check = sub.add_parser("check", help="Check an identity on an algebra file")
    s_check.add_argument("file")
    s_check.add_argument(
        "--identity",
        choices=["right", "left", "both", "commutative", "twostep"],
        default="both",
        help="right: (xy)z=(xz)y, left: x(yz)=y(xz), both: bicommutative",
    )
    s_check.add_argument("--bind", default="", help="Parameter values, e.g. alpha=2,beta=-1/2")

    s_h2 = sub.add_parser("h2", help="Dimensions and generators of the second cohomology")
    s_h2.add_argument("file")
    s_h2.add_argument("--commutative", action="store_true", help="Dump the symmetric part only")
    s_h2.add_argument("--bind", default="")

    s_ext = sub.add_parser("extend", help="Build the central extension by one or more cocycles")
    s_ext.add_argument("file")
    s_ext.add_argument("--cocycle", action="append", required=True, help='e.g. "D(1,2)+D(2,1)"; repeat for s > 1')
    s_ext.add_argument("-o", "--out", required=True, help="Output .alg file")
    s_ext.add_argument("--bind", default="")

    s_fp = sub.add_parser("fingerprint", help="Print the isomorphism invariants of an algebra")
    s_fp.add_argument("file")
    s_fp.add_argument("--bind", default="")

    s_dist = sub.add_parser("distinguish", help="Compare the fingerprints of two algebras")
    s_dist.add_argument("a")
    s_dist.add_argument("b")

    s_aut = sub.add_parser("aut-count", help="Count automorphisms over F_p")
    s_aut.add_argument("file")
    s_aut.add_argument("--prime", type=int, required=True)
    s_aut.add_argument("--bind", default="")

    s_iso = sub.add_parser("isosearch", help="Search for an isomorphism over F_p")
    s_iso.add_argument("a")
    s_iso.add_argument("b")
    s_iso.add_argument("--prime", type=int, action="append", required=True, help="Repeat to try several primes")

    s_ver = sub.add_parser("verify", help="Run verification suites over the catalog")
    s_ver.add_argument("suite", choices=[*SUITES, "all"])
    s_ver.add_argument("--catalog", default=None, help=f"Catalog directory (overrides ${CATALOG_ENV})")
    s_ver.add_argument("--out", default=None, help="Write the report here (.md, .csv or .xlsx)")
    s_ver.add_argument("--emit", default=None, help="Write regenerated algebras into this directory")

    return p


def _read_algebra(path: str, bind: str = "") -> Algebra:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInputError(f"Cannot read {path}: {exc}") from exc
    parsed: ParsedAlgebra = parse_algebra(text, name=Path(path).stem)
    a = parsed.algebra
    values = parse_bindings(bind) if bind else {}
    bad = [c for c in parsed.constraints if c.violated(values)] if values else []
    if bad:
        log.warning("[input] %s: %s excludes these values", path, bad[0])
    if values:
        a = a.substitute(values)
    return a


def _emit(porcelain: bool, human: Sequence[str], kv: Dict[str, Any]) -> None:
    if porcelain:
        for k, v in kv.items():
            print(f"{k}={str(v).lower() if isinstance(v, bool) else v}")
    else:
        for line in human:
            print(line)


def cmd_check(args: argparse.Namespace) -> int:
    a = _read_algebra(args.file, args.bind)
    idents = list(BICOMMUTATIVE) if args.identity == "both" else [Identity(args.identity)]
    ok = True
    human: List[str] = []
    kv: Dict[str, Any] = {}
    for ident in idents:
        res = check_identity(a, ident)
        ok = ok and res.passed
        kv[f"identity.{ident.value}"] = "pass" if res.passed else "fail"
        human.append(f"{ident.value}: {'pass' if res.passed else 'FAIL'}")
        for idx, r in res.violations[:5]:
            human.append(f"  at {tuple(i + 1 for i in idx)}: {[str(x) for x in r]}")
    _emit(args.porcelain, human, kv)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_h2(args: argparse.Namespace) -> int:
    a = _read_algebra(args.file, args.bind)
    coh = h2(a)
    forms = coh.rep_forms(commutative=args.commutative)
    kv = {"dim_z2": coh.z2.dim, "dim_b2": coh.b2.dim, "dim_h2": coh.dim_h2, "dim_h2_com": coh.dim_h2_com}
    human = [f"{k}: {v}" for k, v in kv.items()]
    human.append("generators:" if not args.commutative else "commutative generators:")
    human.extend(f"  [{render_form(f)}]" for f in forms)
    kv["generators"] = ";".join(render_form(f) for f in forms)
    _emit(args.porcelain, human, kv)
    return EXIT_OK


def cmd_extend(args: argparse.Namespace) -> int:
    a = _read_algebra(args.file, args.bind)
    forms = [f for text in args.cocycle for f in parse_cocycle(text, {}, a.dim)]
    spec = ExtensionSpec.of(a, forms)
    ext = central_extension(spec, name=Path(args.out).stem)
    split = nonsplit_check(spec)
    Path(args.out).write_text(serialize_algebra(ext), encoding="utf-8")
    kv = {"dim": ext.dim, "nonsplit": bool(split), "out": args.out}
    human = [f"wrote {args.out} (dim {ext.dim})"]
    if not split:
        human.append(f"warning: split extension ({split.detail})")
    _emit(args.porcelain, human, kv)
    return EXIT_OK


def cmd_fingerprint(args: argparse.Namespace) -> int:
    fp = fingerprint(_read_algebra(args.file, args.bind))
    d = fp.as_dict()
    _emit(args.porcelain, [f"{k}: {v}" for k, v in d.items()], d)
    return EXIT_OK


def cmd_distinguish(args: argparse.Namespace) -> int:
    fa, fb = fingerprint(_read_algebra(args.a)), fingerprint(_read_algebra(args.b))
    da, db = fa.as_dict(), fb.as_dict()
    differ = [k for k in da if da[k] != db[k]]
    human = [f"{k}: {da[k]} vs {db[k]}" for k in differ] or ["fingerprints agree (no conclusion)"]
    if differ:
        human.append("not isomorphic")
    _emit(args.porcelain, human, {"distinct": bool(differ), "differs": ",".join(differ)})
    return EXIT_OK


def cmd_aut_count(args: argparse.Namespace, cfg: AppConfig) -> int:
    if not is_prime(args.prime):
        raise ConfigError(f"{args.prime} is not prime")
    res = aut_enumerate_fp(_read_algebra(args.file, args.bind), args.prime, work_limit=cfg.search.work_limit)
    _emit(args.porcelain, [f"|Aut| over F_{res.p}: {res.count}"], {"prime": res.p, "count": res.count})
    return EXIT_OK


def cmd_isosearch(args: argparse.Namespace, cfg: AppConfig) -> int:
    a, b = _read_algebra(args.a), _read_algebra(args.b)
    found = False
    human: List[str] = []
    kv: Dict[str, Any] = {}
    for p in args.prime:
        if not is_prime(p):
            raise ConfigError(f"{p} is not prime")
        res = iso_search_fp(a, b, p, node_limit=cfg.search.node_limit, lift_bound=cfg.search.lift_bound)
        kv[f"p{p}.found"] = res.found
        kv[f"p{p}.nodes"] = res.nodes
        if res.found:
            found = True
            human.append(f"F_{p}: isomorphism found")
            human.extend("  " + " ".join(str(x) for x in row) for row in res.matrix or [])
            if res.lifted is not None:
                human.append("  lifts to Q")
                kv[f"p{p}.lifted"] = True
        else:
            human.append(f"F_{p}: {res.reason}")
    _emit(args.porcelain, human, kv)
    return EXIT_OK if found else EXIT_FAIL


def _catalog_dir(args: argparse.Namespace, cfg: AppConfig) -> str | None:
    return args.catalog or os.environ.get(CATALOG_ENV) or cfg.catalog


def cmd_verify(args: argparse.Namespace, cfg: AppConfig) -> int:
    catalog = load_catalog(_catalog_dir(args, cfg))
    emit = Path(args.emit) if args.emit else None
    reports = run_suites([args.suite], catalog, cfg, emit_dir=emit)

    for rep in reports:
        if args.porcelain:
            for line in rep.key_values():
                print(line)
        else:
            for line in rep.human_lines(verbose=args.verbose):
                print(line)

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        suffix = out.suffix.lower()
        if suffix == ".csv":
            export_table(reports, csv_path=out)
        elif suffix == ".xlsx":
            export_table(reports, xlsx_path=out)
        else:
            write_report_markdown(reports, out)
            export_table(
                reports,
                csv_path=out.with_suffix(".csv") if cfg.report.export_csv else None,
                xlsx_path=out.with_suffix(".xlsx") if cfg.report.export_excel else None,
            )
        log.info("[verify] Wrote report: %s", out)

    return EXIT_FAIL if any(r.failed for r in reports) else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )

    try:
        cfg = load_config(Path(args.config) if args.config else None)
        if args.cmd == "check":
            return cmd_check(args)
        if args.cmd == "h2":
            return cmd_h2(args)
        if args.cmd == "extend":
            return cmd_extend(args)
        if args.cmd == "fingerprint":
            return cmd_fingerprint(args)
        if args.cmd == "distinguish":
            return cmd_distinguish(args)
        if args.cmd == "aut-count":
            return cmd_aut_count(args, cfg)
        if args.cmd == "isosearch":
            return cmd_isosearch(args, cfg)
        if args.cmd == "verify":
            return cmd_verify(args, cfg)
    except WorkLimitError as exc:
        print(f"error: {exc} (estimate {exc.estimate})", file=sys.stderr)
        return EXIT_FAIL
    except BicommError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    parser.error("Unknown command")
    return EXIT_CONFIG
