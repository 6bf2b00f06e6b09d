from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .scalars import is_prime, parse_rational


@dataclass(frozen=True)
class SamplingConfig:
    # free parameters take values from this list after exclusions
    values: tuple[Fraction, ...] = (Fraction(2), Fraction(3), Fraction(-1), Fraction(5))
    per_family: int = 2


@dataclass(frozen=True)
class SearchConfig:
    primes: tuple[int, ...] = (5, 7, 11, 13)
    primes_per_note: int = 2
    work_limit: int = 10**8
    node_limit: int = 200_000
    lift_bound: int = 2
    # collision classes up to this size get an isomorphism search in `distinguish`
    max_class_size: int = 0


@dataclass(frozen=True)
class TheoremCounts:
    zero: int = 107
    one: int = 77
    two: int = 20
    three: int = 3

    def by_arity(self) -> dict[int, int]:
        return {0: self.zero, 1: self.one, 2: self.two, 3: self.three}


@dataclass(frozen=True)
class ReportConfig:
    export_csv: bool = False
    export_excel: bool = False


@dataclass(frozen=True)
class AppConfig:
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    counts: TheoremCounts = field(default_factory=TheoremCounts)
    report: ReportConfig = field(default_factory=ReportConfig)
    catalog: str | None = None


def _as_bool(x: Any, default: bool) -> bool:
    if x is None:
        return default
    if isinstance(x, bool):
        return x
    if isinstance(x, str):
        return x.strip().lower() in {"1", "true", "yes", "y", "on"}
    return bool(x)


def _section(raw: dict[str, Any], key: str) -> dict[str, Any]:
    value = raw.get(key, {}) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"`{key}:` must be a mapping")
    return value


def load_config(path: Path | None = None) -> AppConfig:
    """Read a YAML config; missing keys keep their defaults, no file means all defaults."""
    if path is None:
        return AppConfig()
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config {path} is not valid YAML: {exc}") from exc
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {path} must be a mapping")

    try:
        s_raw = _section(raw, "sampling")
        sampling = SamplingConfig(
            values=tuple(parse_rational(str(v)) for v in s_raw.get("values", (2, 3, -1, 5))),
            per_family=int(s_raw.get("per_family", 2)),
        )

        q_raw = _section(raw, "search")
        search = SearchConfig(
            primes=tuple(int(p) for p in q_raw.get("primes", (5, 7, 11, 13))),
            primes_per_note=int(q_raw.get("primes_per_note", 2)),
            work_limit=int(q_raw.get("work_limit", 10**8)),
            node_limit=int(q_raw.get("node_limit", 200_000)),
            lift_bound=int(q_raw.get("lift_bound", 2)),
            max_class_size=int(q_raw.get("max_class_size", 0)),
        )

        c_raw = _section(raw, "theorem_counts")
        counts = TheoremCounts(
            zero=int(c_raw.get("zero", 107)),
            one=int(c_raw.get("one", 77)),
            two=int(c_raw.get("two", 20)),
            three=int(c_raw.get("three", 3)),
        )

        r_raw = _section(raw, "report")
        report = ReportConfig(
            export_csv=_as_bool(r_raw.get("export_csv"), False),
            export_excel=_as_bool(r_raw.get("export_excel"), False),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Config {path}: {exc}") from exc

    if len(sampling.values) < 2:
        raise ConfigError("`sampling.values` needs at least two values")
    if sampling.per_family < 1:
        raise ConfigError("`sampling.per_family` must be positive")
    bad = [p for p in search.primes if not is_prime(p)]
    if bad:
        raise ConfigError(f"`search.primes` contains non-primes: {bad}")
    if search.work_limit < 1 or search.node_limit < 1:
        raise ConfigError("`search.work_limit` and `search.node_limit` must be positive")

    catalog = raw.get("catalog")
    return AppConfig(sampling, search, counts, report, str(catalog) if catalog else None)
