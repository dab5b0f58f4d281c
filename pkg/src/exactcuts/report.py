"""Per-instance result records, gap-closed statistics and summary tables.

Records are small JSON files written by ``exactcuts solve --record`` or
``exactcuts batch``.  Exact values are stored as rational strings so that a
report built from them is reproducible bit for bit.  Times are only emitted
on request because they differ between runs.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .branch_and_bound import STATUS_INFEASIBLE, STATUS_OPTIMAL, SolveResult, UndefinedGap, gap_closed
from .rational_core import format_rational, parse_bound

log = logging.getLogger(__name__)

TIME_SHIFT = 1.0
NODE_SHIFT = 100.0
TIME_KEYS = ("total", "exact_lp", "float_lp", "separation")


def _fmt(x) -> Optional[str]:
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format_rational(x)


def _parse(x):
    return None if x is None else parse_bound(x)


@dataclass
class InstanceRecord:
    name: str
    status: str
    objective: Optional[Fraction] = None
    root_before: object = None
    root_after: object = None
    dual_bound: object = None
    nodes: int = 0
    cuts_added: int = 0
    times: Dict[str, float] = field(default_factory=dict)

    def to_json(self, with_times: bool = False) -> str:
        data = asdict(self)
        for key in ("objective", "root_before", "root_after", "dual_bound"):
            data[key] = _fmt(data[key])
        if not with_times:
            data["times"] = {}
        return json.dumps(data, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "InstanceRecord":
        data = json.loads(text)
        for key in ("objective", "root_before", "root_after", "dual_bound"):
            data[key] = _parse(data.get(key))
        return cls(**data)


def record_from_result(name: str, result: SolveResult) -> InstanceRecord:
    return InstanceRecord(
        name=name,
        status=result.status,
        objective=result.objective,
        root_before=result.root_bound_before,
        root_after=result.root_bound_after,
        dual_bound=result.dual_bound,
        nodes=result.node_count,
        cuts_added=result.cuts_added,
        times=dict(result.times),
    )


def shifted_geomean(values: Sequence[float], shift: float) -> float:
    """``(prod (v + s))^(1/n) - s``; 0 for an empty sequence."""
    if not values:
        return 0.0
    logs = [math.log(float(v) + shift) for v in values]
    return math.exp(math.fsum(logs) / len(logs)) - shift


@dataclass
class ReportRow:
    name: str
    status: str
    objective: Optional[Fraction]
    reference: Fraction
    gc_root: Fraction
    gc_limit: Fraction
    nodes: int
    cuts_added: int
    times: Dict[str, float] = field(default_factory=dict)


@dataclass
class RunReport:
    rows: List[ReportRow]
    skipped: List[Tuple[str, str]] = field(default_factory=list)

    def means(self) -> Dict[str, float]:
        """Aggregates, recomputed from the rows every time."""
        out = {"nodes": shifted_geomean([r.nodes for r in self.rows], NODE_SHIFT)}
        if self.rows:
            out["gc_root"] = float(sum((r.gc_root for r in self.rows), Fraction(0)) / len(self.rows))
            out["gc_limit"] = float(sum((r.gc_limit for r in self.rows), Fraction(0)) / len(self.rows))
        for key in TIME_KEYS:
            vals = [r.times[key] for r in self.rows if key in r.times]
            if vals and len(vals) == len(self.rows):
                out[f"time_{key}"] = shifted_geomean(vals, TIME_SHIFT)
        return out


def read_references(path) -> Dict[str, Tuple[str, Optional[Fraction]]]:
    """``name,status,objective`` CSV of reference results."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            obj = row.get("objective") or None
            out[row["name"]] = (row["status"], None if obj is None else parse_bound(obj))
    return out


def write_references(records: Iterable[InstanceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "status", "objective"])
    for rec in sorted(records, key=lambda r: r.name):
        w.writerow([rec.name, rec.status, _fmt(rec.objective) or ""])
    return buf.getvalue()


def read_records(directory) -> List[InstanceRecord]:
    paths = sorted(Path(directory).glob("*.json"))
    return [InstanceRecord.from_json(p.read_text()) for p in paths]


def build_report(records: Iterable[InstanceRecord], references: Dict[str, Tuple[str, Optional[Fraction]]]) -> RunReport:
    rows: List[ReportRow] = []
    skipped: List[Tuple[str, str]] = []

    def skip(name: str, why: str) -> None:
        log.warning("skipping %s: %s", name, why)
        skipped.append((name, why))

    for rec in sorted(records, key=lambda r: r.name):
        if rec.name not in references:
            skip(rec.name, "missing reference")
            continue
        ref_status, p = references[rec.name]
        if ref_status != rec.status and rec.status in (STATUS_OPTIMAL, STATUS_INFEASIBLE):
            skip(rec.name, f"reference status {ref_status} disagrees with {rec.status}")
            continue
        if ref_status != STATUS_OPTIMAL or p is None:
            skip(rec.name, "no reference objective")
            continue
        if rec.status == STATUS_OPTIMAL and rec.objective != p:
            skip(rec.name, "reference objective disagrees with the exact one")
            continue
        if rec.root_before is None or not math.isfinite(rec.root_before):
            skip(rec.name, "no finite root bound")
            continue
        try:
            gc_root = gap_closed(p, rec.root_before, _finite_or(rec.root_after, rec.root_before, p))
            gc_limit = gap_closed(p, rec.root_before, _finite_or(rec.dual_bound, rec.root_before, p))
        except UndefinedGap:
            skip(rec.name, "reference objective equals the root bound")
            continue
        rows.append(ReportRow(rec.name, rec.status, rec.objective, p, gc_root, gc_limit, rec.nodes, rec.cuts_added, dict(rec.times)))
    return RunReport(rows, skipped)


def _finite_or(x, low, high):
    """Clamp a possibly infinite dual bound into ``[low, high]`` for the gap formula."""
    if x is None or x == -math.inf:
        return low
    if x == math.inf:
        return high
    return x


def _columns(with_times: bool) -> List[str]:
    cols = ["name", "status", "objective", "reference", "gc_root", "gc_limit", "nodes", "cuts"]
    if with_times:
        cols += [f"time_{k}" for k in TIME_KEYS]
    return cols


def _cells(row: ReportRow, with_times: bool) -> List[str]:
    cells = [
        row.name,
        row.status,
        _fmt(row.objective) or "",
        _fmt(row.reference),
        f"{float(row.gc_root):.6f}",
        f"{float(row.gc_limit):.6f}",
        str(row.nodes),
        str(row.cuts_added),
    ]
    if with_times:
        cells += [f"{row.times.get(k, 0.0):.6f}" for k in TIME_KEYS]
    return cells


def to_csv(report: RunReport, with_times: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_columns(with_times))
    for row in report.rows:
        w.writerow(_cells(row, with_times))
    return buf.getvalue()


def to_table(report: RunReport, with_times: bool = False) -> str:
    header = _columns(with_times)
    body = [_cells(r, with_times) for r in report.rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(b, widths)))
    means = report.means()
    lines.append("")
    lines.append(f"instances {len(report.rows)}, skipped {len(report.skipped)}")
    for key in sorted(means):
        if key.startswith("time_") and not with_times:
            continue
        lines.append(f"{key} {means[key]:.6f}")
    for name, why in report.skipped:
        lines.append(f"skipped {name}: {why}")
    return "\n".join(lines) + "\n"
