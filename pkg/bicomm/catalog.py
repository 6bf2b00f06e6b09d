from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Sequence, Tuple

from .algebra import Algebra
from .cohomology import Form
from .dsl import (
    Constraint,
    MatrixBlock,
    ParsedAlgebra,
    parse_algebra,
    parse_bindings,
    parse_constraints,
    parse_cocycle,
    parse_formulas,
    parse_matrix,
    parse_nablas,
    split_terms,
)
from .errors import CatalogError, ExcludedValueError, MalformedInputError, MustInstantiateError
from .expr import free_symbols, parse_expr
from .poly import substitute_scalar
from .scalars import format_rational, parse_rational
from .symmetry import ActionFormulaSet, ParametricMatrixFamily

log = logging.getLogger("bicomm")

EMBEDDED_CATALOG = Path(__file__).resolve().parent / "catalog"
CATALOG_ENV = "BICOMM_CATALOG"
NOTES_FILE = "isonotes.txt"

_NABLA_RE = re.compile(r"\bN(\d+)\b")


@dataclass(frozen=True)
class RepresentativeSpec:
    """One orbit representative from a `reps.txt` line.

    Line format, fields separated by `|`:

        B04 | N1+N4+alpha N7+N9 | arity=1 | where alpha != 0 | samples alpha: 2, 3

    Optional fields: `where`, `samples`, `bind alpha=-1/2` (fixes a base
    parameter), `alias` (a name that was already produced elsewhere),
    `symbolic` (coefficients that do not instantiate to rationals) and
    `defect split: <reason>` (a listed orbit whose extension is known to
    fail the named check).
    """

    name: str
    text: str
    entry: str
    arity: int
    constraints: Tuple[Constraint, ...] = ()
    bind: Tuple[Tuple[str, Fraction], ...] = ()
    samples: Tuple[Tuple[str, Tuple[Fraction, ...]], ...] = ()
    alias: bool = False
    symbolic: bool = False
    line: int = 0
    defect: str = ""

    @property
    def s(self) -> int:
        return self.text.count(";") + 1

    @property
    def bindings(self) -> Dict[str, Fraction]:
        return dict(self.bind)

    @property
    def sample_overrides(self) -> Dict[str, Tuple[Fraction, ...]]:
        return dict(self.samples)

    def nabla_symbols(self) -> List[str]:
        return [f"N{k}" for k in _NABLA_RE.findall(self.text)]

    def coefficient_symbols(self) -> List[str]:
        """Free symbols of the coefficients, in order of appearance."""
        out: List[str] = []
        for part in self.text.split(";"):
            for term in split_terms(part.strip()):
                prefix = re.sub(r"(?:D\(\s*\d+\s*,\s*\d+\s*\)|N\d+)\s*$", "", term).strip().rstrip("*").strip()
                if prefix in ("", "+", "-"):
                    continue
                for sym in sorted(free_symbols(parse_expr(prefix)), key=prefix.find):
                    if sym not in _FUNCTION_NAMES and sym not in out:
                        out.append(sym)
        return out

    def free_params(self, base_params: Sequence[str]) -> Tuple[str, ...]:
        bound = self.bindings
        names = [p for p in base_params if p not in bound]
        names += [s for s in self.coefficient_symbols() if s not in names and s not in bound]
        return tuple(names)


_FUNCTION_NAMES = {"sqrt"}


@dataclass
class AutFamily:
    family: ParametricMatrixFamily
    constraints: List[Constraint]
    formulas: ActionFormulaSet | None


@dataclass
class CatalogEntry:
    name: str
    path: Path | None
    parsed: ParsedAlgebra
    nablas: Dict[str, Form] = field(default_factory=dict)
    families: List[AutFamily] = field(default_factory=list)
    reps: List[RepresentativeSpec] = field(default_factory=list)
    expect: Dict[str, str] = field(default_factory=dict)
    h2_generators: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def algebra(self) -> Algebra:
        return self.parsed.algebra

    @property
    def params(self) -> Tuple[str, ...]:
        return self.parsed.algebra.params

    @property
    def constraints(self) -> List[Constraint]:
        return self.parsed.constraints

    @property
    def variant_of(self) -> str | None:
        return self.expect.get("variant_of") or None

    @property
    def variant_bind(self) -> Dict[str, Fraction]:
        text = self.expect.get("variant_bind", "")
        return parse_bindings(text) if text else {}

    @property
    def source(self) -> str:
        return self.expect.get("source", "")

    def expected_int(self, key: str) -> int | None:
        v = self.expect.get(key)
        return int(v) if v not in (None, "") else None

    def sample_overrides(self) -> Dict[str, Tuple[Fraction, ...]]:
        text = self.expect.get("samples", "")
        return _parse_samples(text) if text else {}


def _parse_samples(text: str) -> Dict[str, Tuple[Fraction, ...]]:
    """`alpha: 2, 3; beta: 5`"""
    out: Dict[str, Tuple[Fraction, ...]] = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise MalformedInputError(f"Samples must read `name: v, v`: {chunk!r}")
        name, values = chunk.split(":", 1)
        out[name.strip()] = tuple(parse_rational(v) for v in values.split(",") if v.strip())
    return out


def parse_reps(text: str, entry: str) -> List[RepresentativeSpec]:
    reps: List[RepresentativeSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) < 2:
            raise MalformedInputError(f"reps.txt line {lineno}: expected `name | cocycles | ...`")
        name, text_ = fields[0], fields[1]
        arity: int | None = None
        constraints: List[Constraint] = []
        bind: Dict[str, Fraction] = {}
        samples: Dict[str, Tuple[Fraction, ...]] = {}
        alias = symbolic = False
        defect = ""
        for f in fields[2:]:
            if f.startswith("arity="):
                arity = int(f[len("arity="):])
            elif f.startswith("where"):
                constraints.extend(parse_constraints(f[len("where"):]))
            elif f.startswith("samples"):
                samples.update(_parse_samples(f[len("samples"):]))
            elif f.startswith("bind"):
                bind.update(parse_bindings(f[len("bind"):]))
            elif f == "alias":
                alias = True
            elif f == "symbolic":
                symbolic = True
            elif f.startswith("defect"):
                defect = f[len("defect"):].strip()
                if ":" not in defect:
                    raise MalformedInputError(f"reps.txt line {lineno}: defect reads `defect <check>: <reason>`")
            else:
                raise MalformedInputError(f"reps.txt line {lineno}: unknown field {f!r}")
        if arity is None:
            raise MalformedInputError(f"reps.txt line {lineno}: missing arity")
        reps.append(
            RepresentativeSpec(
                name,
                text_,
                entry,
                arity,
                tuple(constraints),
                tuple(bind.items()),
                tuple(samples.items()),
                alias,
                symbolic,
                lineno,
                defect,
            )
        )
    return reps


def _read_key_values(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedInputError(f"Expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _read_h2(text: str) -> List[Tuple[str, str]]:
    out: List[Tuple[str, str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, _, body = line.partition(":")
        if tag.strip() not in ("com", "bicom") or not body.strip():
            raise MalformedInputError(f"h2.txt lines read `com: ...` or `bicom: ...`, got {line!r}")
        out.append((tag.strip(), body.strip()))
    return out


def load_entry(directory: Path) -> CatalogEntry:
    name = directory.name
    try:
        parsed = parse_algebra((directory / "base.alg").read_text(encoding="utf-8"))
        entry = CatalogEntry(name, directory, parsed)
        params = parsed.algebra.params
        n = parsed.algebra.dim
        if (directory / "expect.txt").exists():
            entry.expect = _read_key_values((directory / "expect.txt").read_text(encoding="utf-8"))
        if (directory / "h2.txt").exists():
            entry.h2_generators = _read_h2((directory / "h2.txt").read_text(encoding="utf-8"))
        if (directory / "nablas.txt").exists():
            entry.nablas = parse_nablas((directory / "nablas.txt").read_text(encoding="utf-8"), n, variables=params)
        if (directory / "aut.mat").exists():
            blocks = parse_matrix((directory / "aut.mat").read_text(encoding="utf-8"), params=params)
            formulas: Dict[str, List[Tuple[str, Any]]] = {}
            if (directory / "formulas.txt").exists():
                variables = tuple(dict.fromkeys(v for b in blocks for v in b.variables))
                formulas = parse_formulas((directory / "formulas.txt").read_text(encoding="utf-8"), variables=variables)
            entry.families = [_family(entry, b, formulas.get(b.name)) for b in blocks]
            unknown = sorted(set(formulas) - {b.name for b in blocks})
            if unknown:
                raise MalformedInputError(f"formulas for unknown matrices: {', '.join(unknown)}")
        if (directory / "reps.txt").exists():
            entry.reps = parse_reps((directory / "reps.txt").read_text(encoding="utf-8"), name)
    except (OSError, MalformedInputError) as exc:
        raise CatalogError(name, str(exc)) from exc
    for rep in entry.reps:
        missing = [s for s in rep.nabla_symbols() if s not in entry.nablas]
        if missing:
            raise CatalogError(name, f"{rep.name} uses undeclared {', '.join(missing)}")
    return entry


def _family(entry: CatalogEntry, block: MatrixBlock, formulas: List[Tuple[str, Any]] | None) -> AutFamily:
    fam = ParametricMatrixFamily(tuple(tuple(r) for r in block.rows), block.variables, block.name)
    fs = None
    if formulas is not None:
        ordered = sorted(entry.nablas, key=lambda k: int(k[1:]))
        if [c for c, _ in formulas] != [f"a{k[1:]}" for k in ordered]:
            raise MalformedInputError(f"{block.name}: formulas must list a1*..a{len(ordered)}* in order")
        fs = ActionFormulaSet(
            tuple(tuple(tuple(r) for r in entry.nablas[k]) for k in ordered),
            tuple(c for c, _ in formulas),
            tuple(p for _, p in formulas),
            block.name,
        )
    return AutFamily(fam, block.constraints, fs)


_NOTE_SIDE_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_^,]*?)\s*(?:\((.*)\))?\s*$")


@dataclass(frozen=True)
class NoteSide:
    rep: str
    bindings: Tuple[Tuple[str, str], ...] = ()

    def variables(self) -> List[str]:
        out: List[str] = []
        for _, expr in self.bindings:
            for sym in sorted(free_symbols(parse_expr(expr)), key=expr.find):
                if sym not in out:
                    out.append(sym)
        return out

    def __str__(self) -> str:
        if not self.bindings:
            return self.rep
        return f"{self.rep}({', '.join(f'{k}={v}' for k, v in self.bindings)})"


@dataclass(frozen=True)
class IsoNote:
    """`B105(alpha=-2) ~ B104(alpha=-2)`: two representatives that give isomorphic algebras."""

    left: NoteSide
    right: NoteSide
    constraints: Tuple[Constraint, ...] = ()
    line: int = 0
    defect: str = ""

    @property
    def name(self) -> str:
        return f"{self.left} ~ {self.right}"

    def variables(self) -> List[str]:
        return list(dict.fromkeys(self.left.variables() + self.right.variables()))


def _parse_note_side(text: str, lineno: int) -> NoteSide:
    m = _NOTE_SIDE_RE.match(text)
    if not m:
        raise MalformedInputError(f"isonotes line {lineno}: cannot read {text.strip()!r}")
    bindings: List[Tuple[str, str]] = []
    if m.group(2):
        for part in m.group(2).split(","):
            if "=" not in part:
                raise MalformedInputError(f"isonotes line {lineno}: expected param=expr, got {part.strip()!r}")
            k, v = (s.strip() for s in part.split("=", 1))
            parse_expr(v)
            bindings.append((k, v))
    return NoteSide(m.group(1), tuple(bindings))


def parse_isonotes(text: str) -> List[IsoNote]:
    notes: List[IsoNote] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        body, *fields = (f.strip() for f in line.split("|"))
        if "~" not in body:
            raise MalformedInputError(f"isonotes line {lineno}: expected `LEFT ~ RIGHT`")
        lhs, rhs = body.split("~", 1)
        constraints: List[Constraint] = []
        defect = ""
        for f in fields:
            if f.startswith("where"):
                constraints.extend(parse_constraints(f[len("where"):]))
            elif f.startswith("defect"):
                defect = f[len("defect"):].strip()
            else:
                raise MalformedInputError(f"isonotes line {lineno}: unknown field {f!r}")
        notes.append(
            IsoNote(_parse_note_side(lhs, lineno), _parse_note_side(rhs, lineno), tuple(constraints), lineno, defect)
        )
    return notes


def catalog_path(path: str | Path | None = None) -> Path:
    if path:
        return Path(path)
    env = os.environ.get(CATALOG_ENV)
    return Path(env) if env else EMBEDDED_CATALOG


class Catalog:
    """Entries keyed by directory name, in sorted order."""

    def __init__(self, entries: Sequence[CatalogEntry], notes: Sequence[IsoNote] = ()) -> None:
        self.notes: List[IsoNote] = list(notes)
        self.entries: Dict[str, CatalogEntry] = {}
        for e in entries:
            if e.name in self.entries:
                raise CatalogError(e.name, "duplicate entry name")
            self.entries[e.name] = e
        for e in entries:
            if e.variant_of and e.variant_of not in self.entries:
                raise CatalogError(e.name, f"variant of unknown entry {e.variant_of}")
        seen: Dict[str, str] = {}
        for e in entries:
            for r in e.reps:
                if r.alias:
                    continue
                if r.name in seen:
                    raise CatalogError(e.name, f"{r.name} is already produced by {seen[r.name]}")
                seen[r.name] = e.name
        self._owners = seen
        for note in self.notes:
            for side in (note.left, note.right):
                if side.rep not in seen:
                    raise CatalogError("isonotes", f"line {note.line}: unknown representative {side.rep}")

    def find_rep(self, name: str) -> Tuple[CatalogEntry, RepresentativeSpec]:
        """The entry and spec that produce representative `name` (aliases are not owners)."""
        owner = self._owners.get(name)
        if owner is None:
            raise CatalogError(name, "no such representative")
        entry = self.entries[owner]
        return entry, next(r for r in entry.reps if r.name == name and not r.alias)

    def __getitem__(self, name: str) -> CatalogEntry:
        try:
            return self.entries[name]
        except KeyError:
            raise CatalogError(name, "no such catalog entry") from None

    def __contains__(self, name: object) -> bool:
        return name in self.entries

    def __iter__(self) -> Iterator[CatalogEntry]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def primary(self) -> List[CatalogEntry]:
        return [e for e in self if not e.variant_of]

    def variants_of(self, name: str) -> List[CatalogEntry]:
        return [e for e in self if e.variant_of == name]

    def representatives(self) -> List[Tuple[CatalogEntry, RepresentativeSpec]]:
        return [(e, r) for e in self for r in e.reps]

    def resolve(self, entry: CatalogEntry | str, bindings: Mapping[str, Any], *, strict: bool = False) -> CatalogEntry:
        """The entry that owns these parameter values (a variant when a case split applies)."""
        entry = self[entry] if isinstance(entry, str) else entry
        bad = [c for c in entry.constraints if c.violated(bindings)]
        if not bad:
            return entry
        if not strict:
            for v in self.variants_of(entry.name):
                vb = v.variant_bind
                if vb and all(k in bindings and Fraction(bindings[k]) == val for k, val in vb.items()):
                    log.info("[catalog] %s at %s is the variant %s", entry.name, _fmt(bindings), v.name)
                    return v
        raise ExcludedValueError(f"{entry.name}: {bad[0]} excludes {_fmt(bindings)}")

    def instantiate(self, entry: CatalogEntry | str, bindings: Mapping[str, Any] | None = None, *, strict: bool = False) -> Algebra:
        bindings = dict(bindings or {})
        target = self.resolve(entry, bindings, strict=strict)
        alg = target.algebra
        missing = [p for p in alg.params if p not in bindings]
        if missing:
            raise MustInstantiateError(f"{target.name}: bind {', '.join(missing)}")
        if not alg.params:
            return alg
        return alg.substitute({p: Fraction(bindings[p]) for p in alg.params})


def _fmt(bindings: Mapping[str, Any]) -> str:
    return ",".join(f"{k}={format_rational(Fraction(v))}" for k, v in bindings.items())


def load_catalog(path: str | Path | None = None) -> Catalog:
    root = catalog_path(path)
    if not root.is_dir():
        raise CatalogError(str(root), "catalog directory not found")
    entries = [load_entry(d) for d in sorted(root.iterdir()) if d.is_dir() and (d / "base.alg").exists()]
    notes: List[IsoNote] = []
    if (root / NOTES_FILE).exists():
        try:
            notes = parse_isonotes((root / NOTES_FILE).read_text(encoding="utf-8"))
        except MalformedInputError as exc:
            raise CatalogError(NOTES_FILE, str(exc)) from exc
    log.info("[catalog] Loaded %d entries and %d notes from %s", len(entries), len(notes), root)
    return Catalog(entries, notes)


def sample_bindings(
    names: Sequence[str],
    constraints: Sequence[Constraint],
    values: Sequence[Any],
    *,
    per_family: int = 2,
    overrides: Mapping[str, Sequence[Any]] | None = None,
) -> List[Dict[str, Fraction]]:
    """Deterministic parameter points: param i takes survivors[(k + i) % len] for k = 0, 1, ...

    Survivors are the values left after single-parameter exclusions; joint
    exclusions drop whole points.
    """
    if not names:
        return [{}]
    overrides = dict(overrides or {})
    pools: List[List[Fraction]] = []
    for name in names:
        pool = [Fraction(v) for v in overrides.get(name, values)]
        pool = [v for v in pool if not any(c.names == (name,) and c.values[0] == v for c in constraints)]
        if not pool:
            raise ExcludedValueError(f"No admissible sample value for {name}")
        pools.append(pool)
    out: List[Dict[str, Fraction]] = []
    limit = max(len(p) for p in pools) * 2
    for k in range(limit):
        point = {name: pool[(k + i) % len(pool)] for i, (name, pool) in enumerate(zip(names, pools))}
        if any(c.violated(point) for c in constraints):
            continue
        if point not in out:
            out.append(point)
        if len(out) == per_family:
            break
    if len(out) < min(2, per_family):
        raise ExcludedValueError(
            f"{len(out)} admissible sample point(s) for {', '.join(names)}; a parametric family needs at least 2"
        )
    return out


def rep_forms(entry: CatalogEntry, rep: RepresentativeSpec, bindings: Mapping[str, Any]) -> List[Form]:
    """Cocycles of a representative with every parameter bound."""
    env = {k: Fraction(v) for k, v in bindings.items()}
    nablas = {k: [[substitute_scalar(x, env) for x in row] for row in f] for k, f in entry.nablas.items()}
    return parse_cocycle(rep.text, nablas, entry.algebra.dim, env=env)
