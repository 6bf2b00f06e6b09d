from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List

import pandas as pd


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"


@dataclass
class ReportItem:
    name: str
    status: Status
    reason: str = ""
    data: Dict[str, Any] = field(default_factory=dict)


def natural_key(name: str) -> tuple:
    """B9 sorts before B10, N04 before N04_0."""
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name))


def _value(x: Any) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    return str(x).replace(" ", "")


def _key(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.^,=/-]+", "_", name).strip("_")


@dataclass
class Report:
    suite: str
    items: List[ReportItem] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, name: str, status: Status, reason: str = "", **data: Any) -> ReportItem:
        item = ReportItem(name, status, reason, data)
        self.items.append(item)
        return item

    def sorted(self) -> "Report":
        self.items.sort(key=lambda it: natural_key(it.name))
        return self

    def count(self, status: Status) -> int:
        return sum(1 for it in self.items if it.status == status)

    @property
    def failed(self) -> bool:
        return self.count(Status.FAIL) > 0

    def key_values(self) -> List[str]:
        lines = [
            f"{self.suite}.passed={self.count(Status.PASS)}",
            f"{self.suite}.failed={self.count(Status.FAIL)}",
            f"{self.suite}.skipped={self.count(Status.SKIP)}",
        ]
        for it in self.items:
            prefix = f"{self.suite}.{_key(it.name)}"
            lines.append(f"{prefix}.status={it.status.value}")
            for k, v in it.data.items():
                lines.append(f"{prefix}.{k}={_value(v)}")
        return lines

    def summary(self) -> str:
        return (
            f"[{self.suite}] {self.count(Status.PASS)} passed, "
            f"{self.count(Status.FAIL)} failed, {self.count(Status.SKIP)} skipped"
        )

    def human_lines(self, *, verbose: bool = False) -> List[str]:
        lines = []
        for it in self.items:
            if it.status == Status.PASS and not verbose:
                continue
            tail = f": {it.reason}" if it.reason else ""
            lines.append(f"  {it.status.value.upper():4} {it.name}{tail}")
        lines.extend(f"  note: {n}" for n in self.notes)
        lines.append(self.summary())
        return lines


def _utcnow() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def write_report_markdown(reports: Iterable[Report], out_path: Path) -> None:
    reports = list(reports)
    lines: List[str] = []
    lines.append("# bicomm verification report")
    lines.append("")
    lines.append(f"_Generated: {_utcnow()}_")
    lines.append("")
    for rep in reports:
        lines.append(f"## {rep.suite}")
        lines.append("")
        lines.append(
            f"**Passed:** {rep.count(Status.PASS)}  |  **Failed:** {rep.count(Status.FAIL)}  |  "
            f"**Skipped:** {rep.count(Status.SKIP)}"
        )
        lines.append("")
        for n in rep.notes:
            lines.append(f"> {n}")
        if rep.notes:
            lines.append("")
        lines.append("| item | status | detail |")
        lines.append("|---|---|---|")
        for it in rep.items:
            detail = it.reason or ", ".join(f"{k}={_value(v)}" for k, v in it.data.items())
            lines.append(f"| {it.name} | {it.status.value} | {detail.replace('|', '/')} |")
        lines.append("")
    out_path.write_text("\n".join(lines), encoding="utf-8")


def export_table(reports: Iterable[Report], *, csv_path: Path | None = None, xlsx_path: Path | None = None) -> None:
    flat: List[Dict[str, Any]] = []
    for rep in reports:
        for it in rep.items:
            row: Dict[str, Any] = {"suite": rep.suite, "item": it.name, "status": it.status.value, "reason": it.reason}
            row.update({k: _value(v) for k, v in it.data.items()})
            flat.append(row)
    if not flat:
        return

    df = pd.DataFrame(flat)
    preferred = ["suite", "item", "status", "reason"]
    cols = preferred + [c for c in df.columns if c not in preferred]
    df = df[cols]

    if csv_path:
        df.to_csv(csv_path, index=False)
    if xlsx_path:
        df.to_excel(xlsx_path, index=False)
