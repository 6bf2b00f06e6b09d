from __future__ import annotations

import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from .algebra import (
    Algebra,
    annihilator,
    fingerprint,
    is_bicommutative,
    is_commutative,
    is_two_step,
    nilpotency_index,
    power_chain,
)
from .catalog import (
    Catalog,
    CatalogEntry,
    IsoNote,
    NoteSide,
    RepresentativeSpec,
    rep_forms,
    sample_bindings,
)
from .cohomology import (
    ExtensionSpec,
    check_generators,
    central_extension,
    extension_annihilator_law,
    h2,
    is_cocycle,
    nonsplit_check,
)
from .config import AppConfig
from .dsl import Constraint, parse_cocycle, serialize_algebra
from .errors import BicommError, IrrationalValueError, NonReducibleError
from .expr import eval_expr
from .report import Report, Status, natural_key
from .scalars import format_rational
from .symmetry import certify_parametric_aut, iso_search_fp, pick_primes, verify_action_formulas

log = logging.getLogger("bicomm")

EXTENSION_DIM = 5
SUITES = ("tables", "actions", "extensions", "counts", "distinguish", "isonotes")


@dataclass
class Generated:
    """One regenerated algebra: a representative at one parameter point."""

    entry: CatalogEntry
    rep: RepresentativeSpec
    bindings: Dict[str, Fraction]
    algebra: Algebra

    @property
    def label(self) -> str:
        return label(self.rep.name, self.bindings)


def label(name: str, bindings: Mapping[str, Any]) -> str:
    if not bindings:
        return name
    inner = ",".join(f"{k}={format_rational(Fraction(v))}" for k, v in bindings.items())
    return f"{name}[{inner}]"


def _file_stem(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", text).strip("_")


def render_vector(v: Sequence[Any]) -> str:
    """`e3+e4`, `2e1-1/2e3`; 1-based."""
    parts: List[str] = []
    for i, x in enumerate(v):
        if x == 0:
            continue
        x = Fraction(x)
        coeff = "" if abs(x) == 1 else format_rational(abs(x))
        parts.append(f"{'-' if x < 0 else '+'}{coeff}e{i + 1}")
    text = "".join(parts).lstrip("+")
    return text or "0"


def _points(names: Sequence[str], constraints: Sequence[Constraint], cfg: AppConfig, overrides: Mapping[str, Any]) -> List[Dict[str, Fraction]]:
    return sample_bindings(
        names,
        constraints,
        cfg.sampling.values,
        per_family=cfg.sampling.per_family,
        overrides=overrides,
    )


def rep_points(entry: CatalogEntry, rep: RepresentativeSpec, cfg: AppConfig) -> List[Dict[str, Fraction]]:
    """Sample points for every free parameter of a representative, with its fixed bindings merged in."""
    free = rep.free_params(entry.params)
    constraints = list(entry.constraints) + list(rep.constraints)
    overrides = {**entry.sample_overrides(), **rep.sample_overrides}
    return [{**rep.bindings, **p} for p in _points(free, constraints, cfg, overrides)]


def _base_bindings(entry: CatalogEntry, bindings: Mapping[str, Any]) -> Dict[str, Fraction]:
    return {p: Fraction(bindings[p]) for p in entry.params if p in bindings}


def build_extension(
    catalog: Catalog,
    entry: CatalogEntry,
    rep: RepresentativeSpec,
    bindings: Mapping[str, Any],
    *,
    enforce: bool = True,
) -> ExtensionSpec:
    """The extension data of `rep` at `bindings`; `enforce=False` skips base exclusions."""
    base_point = _base_bindings(entry, bindings)
    if enforce:
        base = catalog.instantiate(entry, base_point, strict=True)
    else:
        base = entry.algebra.substitute(base_point) if entry.params else entry.algebra
    return ExtensionSpec.of(base, rep_forms(entry, rep, bindings))


def _hits_square(a: Algebra, forms: Sequence[Sequence[Sequence[Any]]]) -> bool:
    """Does some theta take a nonzero value on A^2 x A or A x A^2?"""
    chain = power_chain(a, max_steps=1)
    if len(chain) < 2:
        return False
    n = a.dim
    for v in chain[1].basis:
        for f in forms:
            for j in range(n):
                left = sum((v[i] * f[i][j] for i in range(n) if v[i] != 0), Fraction(0))
                right = sum((v[i] * f[j][i] for i in range(n) if v[i] != 0), Fraction(0))
                if left != 0 or right != 0:
                    return True
    return False


# -- tables ----------------------------------------------------------------


def verify_h2_tables(catalog: Catalog, cfg: AppConfig) -> Report:
    report = Report("tables")
    for entry in catalog:
        want = entry.expected_int("h2_bicom")
        want_com = entry.expected_int("h2_com")
        want_nil = entry.expected_int("nilindex")
        try:
            points = _points(entry.params, entry.constraints, cfg, entry.sample_overrides())
        except BicommError as exc:
            report.add(entry.name, Status.FAIL, str(exc))
            continue
        for point in points:
            name = label(entry.name, point)
            try:
                a = catalog.instantiate(entry, point, strict=True)
                coh = h2(a)
                problems: List[str] = []
                if want is not None and coh.dim_h2 != want:
                    problems.append(f"dim H2 = {coh.dim_h2}, table says {want}")
                if want_com is not None and coh.dim_h2_com != want_com:
                    problems.append(f"dim H2_com = {coh.dim_h2_com}, table says {want_com}")
                nil = nilpotency_index(a)
                if want_nil is not None and nil != want_nil:
                    problems.append(f"nilindex = {nil}, expected {want_nil}")

                listed: List[Any] = []
                com_forms: List[Any] = []
                for tag, body in entry.h2_generators:
                    forms = parse_cocycle(body, {}, a.dim, env=point)
                    listed.extend(forms)
                    if tag == "com":
                        com_forms.extend(forms)
                if listed:
                    gens = check_generators(coh, listed)
                    if not gens.in_z2:
                        problems.append(f"listed generators {[i + 1 for i in gens.missing]} are not cocycles")
                    if gens.span_dim != coh.dim_h2:
                        problems.append(f"listed generators span {gens.span_dim} of {coh.dim_h2} classes")
                if com_forms and want_com is not None and coh.class_rank(com_forms) != want_com:
                    problems.append(f"commutative generators span {coh.class_rank(com_forms)}, expected {want_com}")
            except BicommError as exc:
                report.add(name, Status.FAIL, str(exc))
                continue
            data = {"h2": coh.dim_h2, "h2_com": coh.dim_h2_com, "nilindex": nil}
            if problems:
                report.add(name, Status.FAIL, "; ".join(problems), **data)
            else:
                report.add(name, Status.PASS, **data)
    log.info("[tables] %s", report.summary())
    return report.sorted()


# -- actions ---------------------------------------------------------------


def verify_actions(catalog: Catalog, cfg: AppConfig) -> Report:
    report = Report("actions")
    for entry in catalog:
        for fam in entry.families:
            constraints = list(entry.constraints) + list(fam.constraints)
            try:
                points = _points(entry.params, constraints, cfg, entry.sample_overrides())
            except BicommError as exc:
                report.add(f"{entry.name}/{fam.family.name}", Status.FAIL, str(exc))
                continue
            for point in points:
                name = label(f"{entry.name}/{fam.family.name}", point)
                try:
                    a = catalog.instantiate(entry, point, strict=True)
                    cert = certify_parametric_aut(a, fam.family.substitute(point))
                    if not cert:
                        report.add(name, Status.FAIL, f"not an automorphism family: {cert.detail}")
                        continue
                    if fam.formulas is None:
                        report.add(name, Status.PASS, "certified; no action formulas listed")
                        continue
                    mismatches = verify_action_formulas(entry.algebra, fam.family, fam.formulas, point)
                except BicommError as exc:
                    report.add(name, Status.FAIL, str(exc))
                    continue
                if mismatches:
                    detail = "; ".join(f"{m.coefficient}* expected {m.expected}, computed {m.computed}" for m in mismatches)
                    report.add(name, Status.FAIL, detail, mismatches=len(mismatches))
                else:
                    report.add(name, Status.PASS, formulas=len(fam.formulas.coefficients))
    log.info("[actions] %s", report.summary())
    return report.sorted()


# -- extensions ------------------------------------------------------------


def check_extension(spec: ExtensionSpec) -> Tuple[List[str], Algebra | None]:
    """Every property a regenerated algebra must have; returns problems and the algebra."""
    bad = [i + 1 for i, f in enumerate(spec.cocycles) if not is_cocycle(spec.base, f)]
    if bad:
        return [f"cocycle {bad} is not in Z^2"], None
    problems: List[str] = []
    ext = central_extension(spec, check=False)
    if ext.dim != EXTENSION_DIM:
        problems.append(f"dimension {ext.dim}, expected {EXTENSION_DIM}")
    if not is_bicommutative(ext):
        problems.append("not bicommutative")
    if nilpotency_index(ext) is None:
        problems.append("not nilpotent")
    if is_two_step(ext):
        origin = "cocycle misses A^2" if is_two_step(spec.base) and not _hits_square(spec.base, spec.cocycles) else "2-step"
        problems.append(f"extension is 2-step ({origin})")
    if is_commutative(ext):
        problems.append("extension is commutative")
    split = nonsplit_check(spec)
    if not split:
        witness = f", witness {render_vector(split.witness)}" if split.witness is not None else ""
        problems.append(f"split: {split.detail}{witness}")
    law = extension_annihilator_law(spec)
    if not law:
        problems.append(f"annihilator law: {law.detail}")
    return problems, ext


def documented_defect(rep: RepresentativeSpec, problems: Sequence[str]) -> Tuple[Status, str]:
    """SKIP when the documented check is among the problems, FAIL otherwise."""
    check = rep.defect.split(":", 1)[0].strip()
    if any(p.startswith(f"{check}:") or p == check for p in problems):
        return Status.SKIP, f"documented defect ({rep.defect}); found: {'; '.join(problems)}"
    found = "; ".join(problems) if problems else "extension passes every check"
    return Status.FAIL, f"documented defect `{rep.defect}` does not reproduce: {found}"


def regenerate_extensions(
    catalog: Catalog,
    cfg: AppConfig,
    *,
    emit_dir: Path | None = None,
) -> Tuple[Report, List[Generated]]:
    report = Report("extensions")
    generated: List[Generated] = []
    if emit_dir is not None:
        emit_dir.mkdir(parents=True, exist_ok=True)
    for entry, rep in catalog.representatives():
        if rep.symbolic:
            report.add(rep.name, Status.SKIP, "coefficients are not rational", entry=entry.name)
            continue
        try:
            points = rep_points(entry, rep, cfg)
        except BicommError as exc:
            report.add(rep.name, Status.FAIL, str(exc), entry=entry.name)
            continue
        for point in points:
            name = label(rep.name, point)
            try:
                spec = build_extension(catalog, entry, rep, point)
                problems, ext = check_extension(spec)
            except IrrationalValueError as exc:
                report.add(name, Status.SKIP, str(exc), entry=entry.name)
                continue
            except (BicommError, ZeroDivisionError) as exc:
                report.add(name, Status.FAIL, str(exc), entry=entry.name)
                continue
            if rep.defect:
                report.add(name, *documented_defect(rep, problems), entry=entry.name)
                continue
            if ext is None or problems:
                report.add(name, Status.FAIL, "; ".join(problems), entry=entry.name)
                continue
            ext = Algebra(ext.dim, ext.c, rep.name, ext.params, ext.modulus)
            generated.append(Generated(entry, rep, dict(point), ext))
            report.add(name, Status.PASS, entry=entry.name, s=rep.s, nilindex=nilpotency_index(ext), dim_ann=annihilator(ext).dim)
            if emit_dir is not None:
                (emit_dir / f"{_file_stem(name)}.alg").write_text(serialize_algebra(ext), encoding="utf-8")
    log.info("[extensions] %s", report.summary())
    generated.sort(key=lambda g: natural_key(g.label))
    return report.sorted(), generated


# -- counts ----------------------------------------------------------------


def section_of(entry: CatalogEntry) -> str:
    if entry.name.startswith("N"):
        return "2-step 4-dim"
    if entry.name.startswith("B4"):
        return "3-step 4-dim"
    return "3-dim"


def count_theorem_a(catalog: Catalog, cfg: AppConfig) -> Report:
    """Tally representatives by parameter arity; aliases are names produced elsewhere."""
    report = Report("counts")
    tally: Counter[int] = Counter()
    sections: Dict[str, Counter[int]] = defaultdict(Counter)
    names = set()
    for entry, rep in catalog.representatives():
        if rep.alias:
            continue
        names.add(rep.name)
        tally[rep.arity] += 1
        sections[section_of(entry)][rep.arity] += 1

    for arity, want in cfg.counts.by_arity().items():
        got = tally.get(arity, 0)
        status = Status.PASS if got == want else Status.FAIL
        reason = "" if got == want else f"found {got}, expected {want}"
        report.add(f"arity_{arity}", status, reason, found=got, expected=want)
    for arity in sorted(a for a in tally if a not in cfg.counts.by_arity()):
        report.add(f"arity_{arity}", Status.FAIL, f"{tally[arity]} families with {arity} parameters", found=tally[arity], expected=0)
    report.add("names", Status.PASS, distinct=len(names))
    for sec in sorted(sections):
        sub = sections[sec]
        report.notes.append(f"{sec}: " + ", ".join(f"{a}-param {sub[a]}" for a in sorted(sub)))
        report.add(f"section:{sec}", Status.PASS, **{f"arity_{a}": sub[a] for a in sorted(sub)})
    log.info("[counts] %s", report.summary())
    return report


# -- distinguish -----------------------------------------------------------


def _noted_pairs(catalog: Catalog) -> set[frozenset[str]]:
    return {frozenset((n.left.rep, n.right.rep)) for n in catalog.notes}


def distinguish_all(generated: Sequence[Generated], cfg: AppConfig, catalog: Catalog | None = None) -> Report:
    """Fingerprint one point per representative; collisions are reported, not failed."""
    report = Report("distinguish")
    firsts: Dict[str, Generated] = {}
    for g in generated:
        firsts.setdefault(g.rep.name, g)
    classes: Dict[str, List[Generated]] = defaultdict(list)
    for name in sorted(firsts, key=natural_key):
        g = firsts[name]
        try:
            classes[str(fingerprint(g.algebra))].append(g)
        except BicommError as exc:
            report.add(g.label, Status.FAIL, str(exc))
    noted = _noted_pairs(catalog) if catalog is not None else set()
    collisions = 0
    for fp, members in sorted(classes.items(), key=lambda kv: natural_key(kv[1][0].label)):
        if len(members) < 2:
            continue
        collisions += 1
        names = [m.label for m in members]
        data: Dict[str, Any] = {"size": len(members), "fingerprint": fp}
        limit = cfg.search.max_class_size
        if limit and len(members) <= limit:
            head = members[0]
            found = []
            for other in members[1:]:
                primes = pick_primes([head.algebra, other.algebra], cfg.search.primes, count=1)
                if not primes:
                    continue
                try:
                    res = iso_search_fp(head.algebra, other.algebra, primes[0], node_limit=cfg.search.node_limit)
                except NonReducibleError:
                    continue
                if res.found:
                    tag = "noted" if frozenset((head.rep.name, other.rep.name)) in noted else "unnoted"
                    found.append(f"{other.label}@F{res.p}:{tag}")
            data["certificates"] = ";".join(found) or "none"
        report.add(f"collision {names[0]}", Status.PASS, ", ".join(names), **data)
    report.notes.append(f"{len(firsts)} algebras, {len(classes)} distinct fingerprints, {collisions} collision classes")
    log.info("[distinguish] %s", report.notes[-1])
    return report


# -- isomorphism notes -----------------------------------------------------

CERTIFIED = "certified"
CONSISTENT = "fingerprint-consistent"
FAILED = "failed"


def _side_algebra(catalog: Catalog, side: NoteSide, env: Mapping[str, Fraction], cfg: AppConfig) -> Tuple[str, Algebra]:
    entry, rep = catalog.find_rep(side.rep)
    free = rep.free_params(entry.params)
    explicit = {k: eval_expr(expr, env) for k, expr in side.bindings}
    unknown = [k for k in explicit if k not in free and k not in rep.bindings]
    if unknown:
        raise BicommError(f"{side.rep} has no parameter {unknown[0]}")
    missing = [p for p in free if p not in explicit]
    extra = _points(missing, (), cfg, rep.sample_overrides)[0] if missing else {}
    bindings = {**rep.bindings, **explicit, **extra}
    spec = build_extension(catalog, entry, rep, bindings, enforce=False)
    ext = central_extension(spec)
    return label(side.rep, {**explicit, **extra}), ext


def check_note(catalog: Catalog, note: IsoNote, cfg: AppConfig) -> Tuple[str, str, Dict[str, Any]]:
    """Status, reason and data for one coincidence note."""
    variables = note.variables()
    points = _points(variables, note.constraints, cfg, {}) if variables else [{}]
    statuses: List[str] = []
    certs: List[str] = []
    for point in points:
        try:
            left_name, left = _side_algebra(catalog, note.left, point, cfg)
            right_name, right = _side_algebra(catalog, note.right, point, cfg)
            fl, fr = fingerprint(left), fingerprint(right)
        except (BicommError, ZeroDivisionError) as exc:
            return FAILED, f"at {label('', point)}: {exc}", {}
        if fl != fr:
            return FAILED, f"{left_name} has fingerprint {fl}, {right_name} has {fr}", {}
        certified = False
        for p in pick_primes([left, right], cfg.search.primes, count=cfg.search.primes_per_note):
            try:
                res = iso_search_fp(left, right, p, node_limit=cfg.search.node_limit, lift_bound=cfg.search.lift_bound)
            except NonReducibleError:
                continue
            if res.found:
                certified = True
                certs.append(f"{left_name}@F{p}" + ("+Q" if res.lifted is not None else ""))
                break
        statuses.append(CERTIFIED if certified else CONSISTENT)
    status = CERTIFIED if statuses and all(s == CERTIFIED for s in statuses) else CONSISTENT
    return status, "", {"points": len(points), "certificates": ";".join(certs) or "none"}


def verify_iso_notes(catalog: Catalog, cfg: AppConfig, notes: Sequence[IsoNote] | None = None) -> Report:
    report = Report("isonotes")
    for note in catalog.notes if notes is None else notes:
        status, reason, data = check_note(catalog, note, cfg)
        log.info("[isonotes] %s: %s", note.name, status)
        if note.defect and status == FAILED:
            report.add(note.name, Status.SKIP, f"documented defect ({note.defect}); found: {reason}", result=status)
        elif note.defect:
            report.add(note.name, Status.FAIL, f"documented defect `{note.defect}` does not reproduce", result=status, **data)
        else:
            report.add(note.name, Status.FAIL if status == FAILED else Status.PASS, reason, result=status, **data)
    return report


# -- orchestration ---------------------------------------------------------


def run_suites(
    names: Sequence[str],
    catalog: Catalog,
    cfg: AppConfig,
    *,
    emit_dir: Path | None = None,
) -> List[Report]:
    wanted = list(SUITES) if "all" in names else list(names)
    unknown = [n for n in wanted if n not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suite {unknown[0]!r}")
    reports: List[Report] = []
    generated: List[Generated] | None = None
    for name in wanted:
        log.info("[verify] Suite: %s", name)
        if name == "tables":
            reports.append(verify_h2_tables(catalog, cfg))
        elif name == "actions":
            reports.append(verify_actions(catalog, cfg))
        elif name == "extensions":
            rep, generated = regenerate_extensions(catalog, cfg, emit_dir=emit_dir)
            reports.append(rep)
        elif name == "counts":
            reports.append(count_theorem_a(catalog, cfg))
        elif name == "distinguish":
            if generated is None:
                _, generated = regenerate_extensions(catalog, cfg, emit_dir=emit_dir)
            reports.append(distinguish_all(generated, cfg, catalog))
        elif name == "isonotes":
            reports.append(verify_iso_notes(catalog, cfg))
    return reports
