"""Check records, their summaries and the two report renderings.

The machine stream is newline-delimited JSON with the fixed fields
``check``, ``point``, ``residual`` and ``pass``; skipped points carry
``null`` in the last two.  The human rendering is an aligned table.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from spray_geometry.expr import Point

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INPUT = 2


def format_number(value: float) -> str:
    return f"{float(value) + 0.0:.12g}"


def format_point(u: Point) -> str:
    x = ", ".join(format_number(v) for v in u.x)
    y = ", ".join(format_number(v) for v in u.y)
    return f"x=({x}) y=({y})"


def format_matrix(matrix: np.ndarray) -> str:
    rows = ", ".join("[" + ", ".join(format_number(v) for v in row) + "]" for row in matrix)
    return f"[{rows}]"


def _json_matrix(matrix: np.ndarray) -> list[list[float]]:
    return [[float(v) + 0.0 for v in row] for row in np.asarray(matrix)]


@dataclass(frozen=True)
class CheckRecord:
    """One check at one point; ``residual`` is None when the point was skipped."""

    check: str
    index: int
    point: Point
    residual: float | None
    tolerance: float
    note: str | None = None

    @property
    def skipped(self) -> bool:
        return self.residual is None

    @property
    def passed(self) -> bool | None:
        if self.residual is None:
            return None
        return bool(self.residual <= self.tolerance)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "point": list(self.point.z),
            "residual": self.residual,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class CheckSummary:
    check: str
    tolerance: float
    points: int
    passed: int
    failed: int
    skipped: int
    worst: float | None
    informational: bool = False

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "tolerance": self.tolerance,
            "points": self.points,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "worst_residual": self.worst,
            "informational": self.informational,
        }


@dataclass
class Report:
    """All records of one run, kept sorted by (check order, point index)."""

    command: str
    checks: Sequence[str]
    records: list[CheckRecord] = field(default_factory=list)
    informational: frozenset[str] = frozenset()

    def __post_init__(self):
        order = {name: k for k, name in enumerate(self.checks)}
        self.records.sort(key=lambda r: (order.get(r.check, len(order)), r.index))

    def summaries(self) -> list[CheckSummary]:
        result = []
        for name in self.checks:
            records = [r for r in self.records if r.check == name]
            residuals = [r.residual for r in records if r.residual is not None]
            result.append(
                CheckSummary(
                    check=name,
                    tolerance=records[0].tolerance if records else float("nan"),
                    points=len(records),
                    passed=sum(1 for r in records if r.passed is True),
                    failed=sum(1 for r in records if r.passed is False),
                    skipped=sum(1 for r in records if r.skipped),
                    worst=max(residuals) if residuals else None,
                    informational=name in self.informational,
                )
            )
        return result

    @property
    def failures(self) -> list[CheckRecord]:
        return [
            r for r in self.records if r.passed is False and r.check not in self.informational
        ]

    @property
    def skipped(self) -> int:
        return sum(1 for r in self.records if r.skipped)

    @property
    def exit_code(self) -> int:
        return EXIT_TOLERANCE if self.failures else EXIT_OK

    def summary_json(self) -> dict:
        return {
            "command": self.command,
            "checks": [s.to_json() for s in self.summaries()],
            "failed": len(self.failures),
            "skipped": self.skipped,
            "exit_code": self.exit_code,
        }

    def to_ndjson(self) -> str:
        lines = [json.dumps(r.to_json()) for r in self.records]
        lines.append(json.dumps({"summary": self.summary_json()}))
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        header = ("check", "points", "pass", "fail", "skip", "worst residual", "tolerance")
        rows = []
        for s in self.summaries():
            name = s.check + (" (informational)" if s.informational else "")
            worst = f"{s.worst:.3e}" if s.worst is not None else "-"
            rows.append(
                (name, str(s.points), str(s.passed), str(s.failed), str(s.skipped),
                 worst, f"{s.tolerance:.0e}")
            )
        widths = [max(len(row[k]) for row in [header, *rows]) for k in range(len(header))]

        def line(row):
            cells = [row[0].ljust(widths[0])]
            cells += [cell.rjust(width) for cell, width in zip(row[1:], widths[1:], strict=True)]
            return "  ".join(cells).rstrip()

        out = [line(header), line(tuple("-" * w for w in widths))]
        out += [line(row) for row in rows]
        for r in self.records:
            if r.passed is False:
                tag = "INFO" if r.check in self.informational else "FAIL"
                out.append(
                    f"{tag} {r.check} point {r.index}: {format_point(r.point)} "
                    f"residual {r.residual:.3e}"
                )
            elif r.skipped:
                out.append(f"SKIP {r.check} point {r.index}: {format_point(r.point)}: {r.note}")
        verdict = "FAIL" if self.failures else "PASS"
        out.append(
            f"{self.command}: {verdict} ({len(self.failures)} failed, {self.skipped} skipped)"
        )
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ConnectionRecord:
    index: int
    point: Point
    matrix: np.ndarray | None
    note: str | None = None

    def to_json(self) -> dict:
        return {
            "point": list(self.point.z),
            "connection": None if self.matrix is None else _json_matrix(self.matrix),
        }

    def to_text(self) -> str:
        head = f"point {self.index}: {format_point(self.point)}"
        if self.matrix is None:
            return f"{head}\n  skipped: {self.note}"
        return f"{head}\n  N = {format_matrix(self.matrix)}"


def connections_ndjson(records: Sequence[ConnectionRecord]) -> str:
    return "".join(json.dumps(r.to_json()) + "\n" for r in records)


def connections_table(records: Sequence[ConnectionRecord]) -> str:
    return "".join(r.to_text() + "\n" for r in records)
