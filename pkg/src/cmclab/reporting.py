"""Verification reports: per-check residual records with serialization.

A report is an ordered list of check records, each carrying the residual
statistics (or computed values) of one verification step together with
its tolerance and pass flag.  The structured format is JSON with sorted
keys and no timestamps, so identical runs emit byte-identical documents;
the CSV format is a flat table for plotting and regression diffs.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError

REPORT_FORMAT_VERSION = 1


@dataclass
class CheckRecord:
    """One verification step: a named check with residuals and a verdict."""

    check_id: str
    operation: str
    parameters: dict = field(default_factory=dict)
    max_residual: Optional[float] = None
    rms_residual: Optional[float] = None
    values: dict = field(default_factory=dict)
    tolerance: Optional[float] = None
    passed: bool = True

    def to_dict(self):
        return {
            "check_id": self.check_id,
            "operation": self.operation,
            "parameters": _plain(self.parameters),
            "max_residual": self.max_residual,
            "rms_residual": self.rms_residual,
            "values": _plain(self.values),
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(check_id=d["check_id"], operation=d["operation"],
                   parameters=dict(d.get("parameters", {})),
                   max_residual=d.get("max_residual"),
                   rms_residual=d.get("rms_residual"),
                   values=dict(d.get("values", {})),
                   tolerance=d.get("tolerance"),
                   passed=bool(d["passed"]))


def _plain(obj):
    """Coerce numpy scalars / complex values into JSON-safe primitives."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


@dataclass
class VerificationReport:
    """Ordered collection of check records with provenance."""

    name: str
    records: list = field(default_factory=list)
    version: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.version:
            from . import __version__
            self.version = __version__

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.records.append(record)
        return record

    def extend(self, records):
        self.records.extend(records)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def record_map(self):
        return {r.check_id: r for r in self.records}

    # ------------------------------------------------------ serialization

    def to_dict(self):
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "name": self.name,
            "version": self.version,
            "provenance": _plain(self.provenance),
            "overall_pass": self.overall_pass,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d) -> "VerificationReport":
        rep = cls(name=d["name"], version=d.get("version", ""),
                  provenance=dict(d.get("provenance", {})))
        rep.records = [CheckRecord.from_dict(r) for r in d.get("records", [])]
        return rep

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Flat table, one row per record; residuals at 17 significant digits."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check_id", "operation", "max_residual",
                         "rms_residual", "tolerance", "passed",
                         "values", "parameters"])
        for r in self.records:
            writer.writerow([
                r.check_id, r.operation,
                _sig17(r.max_residual), _sig17(r.rms_residual),
                _sig17(r.tolerance), str(bool(r.passed)).lower(),
                json.dumps(_plain(r.values), sort_keys=True),
                json.dumps(_plain(r.parameters), sort_keys=True),
            ])
        return buf.getvalue()


def _sig17(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def render_text(report: VerificationReport) -> str:
    """Human-readable summary: one verdict line per record plus a footer."""
    lines = [f"report: {report.name}"]
    for r in report.records:
        verdict = "PASS" if r.passed else "FAIL"
        parts = []
        if r.max_residual is not None:
            parts.append(f"max={r.max_residual:.3e}")
        if r.tolerance is not None:
            parts.append(f"tol={r.tolerance:.3e}")
        detail = f"  ({' '.join(parts)})" if parts else ""
        lines.append(f"  [{verdict}] {r.check_id}{detail}")
    n_fail = sum(1 for r in report.records if not r.passed)
    overall = "PASS" if report.overall_pass else f"FAIL ({n_fail} failing)"
    lines.append(f"overall: {overall}  [{len(report.records)} checks]")
    return "\n".join(lines) + "\n"


def emit_report(report: VerificationReport, fmt: str, path) -> str:
    """Write a report file; fmt is "structured" (JSON) or "csv"."""
    if fmt == "structured":
        text = report.to_json()
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)


def parse_report(path) -> VerificationReport:
    """Re-read a structured report; inverse of emit_report("structured")."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return VerificationReport.from_json(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: not a structured report file ({exc})") from None


def record_from_stats(check_id: str, operation: str, parameters: dict,
                      max_residual: float, rms_residual: float,
                      tolerance: Optional[float],
                      values: Optional[dict] = None) -> CheckRecord:
    """Build a record whose verdict is max_residual <= tolerance."""
    passed = True if tolerance is None else bool(max_residual <= tolerance)
    return CheckRecord(check_id=check_id, operation=operation,
                       parameters=parameters, max_residual=float(max_residual),
                       rms_residual=float(rms_residual),
                       values=values or {}, tolerance=tolerance, passed=passed)
