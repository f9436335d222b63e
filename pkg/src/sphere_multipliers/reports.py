"""
Report records and artifact writers.

Artifacts are deterministic: JSON with sorted keys, CSV with a header row and
LF line endings, floats in shortest round-trip form, no timestamps. Files are
written once through a temporary file and os.replace.
"""

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np


@dataclass
class CheckReport:
    """
    Outcome of one verifier run.

    `value` is the residual (identities) or margin (inequalities) that
    decided `passed`; `trace` holds optional per-t / per-n rows.
    """
    check: str
    inputs: dict
    lhs: Optional[float]
    rhs: Optional[float]
    value: float
    passed: bool
    tolerances: dict
    trace: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_record(self, include_trace: bool = False) -> dict:
        record = {
            "check": self.check,
            "inputs": self.inputs,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual_or_margin": self.value,
            "pass": self.passed,
            "tolerances": self.tolerances,
        }
        if self.details:
            record["details"] = self.details
        if include_trace:
            record["trace"] = self.trace
        return plain(record)


def combine_reports(check: str, reports: Sequence[CheckReport], worst: str = "max") -> CheckReport:
    """
    Merge a campaign into one record: the worst value decides, every
    member must pass. `worst` is "max" for residuals and "min" for margins.
    """
    if not reports:
        raise ValueError("nothing to combine")
    pick = max if worst == "max" else min
    decisive = pick(reports, key=lambda r: r.value)
    trace = []
    for report in reports:
        trace.append({**report.inputs, "lhs": report.lhs, "rhs": report.rhs,
                      "value": report.value, "pass": report.passed})
    return CheckReport(
        check=check,
        inputs={"runs": len(reports), "decisive": decisive.inputs},
        lhs=decisive.lhs,
        rhs=decisive.rhs,
        value=decisive.value,
        passed=all(r.passed for r in reports),
        tolerances=decisive.tolerances,
        trace=trace,
        details={"failed": sum(1 for r in reports if not r.passed)},
    )


def plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples to JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return repr(value)
        return value
    return value


def format_json(payload: Any) -> str:
    return json.dumps(plain(payload), indent=2, sort_keys=True) + "\n"


def format_float(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(row.get(column)) for column in columns])
    return buffer.getvalue()


def atomic_write_text(path: Path, text: str) -> Path:
    """Write via a sibling temporary file and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
