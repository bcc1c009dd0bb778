"""InequalityReport and its JSON / CSV serialisation.

JSON: one object per report with keys ``name, lhs, rhs, ratio, slack,
saturated, numeric_error, params``; floats carry 17 significant digits.

CSV: fixed columns ``name, lhs, rhs, ratio, slack, saturated,
numeric_error`` followed by one ``param.<key>`` column per parameter key
(sorted); floats carry 12 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SATURATION_TOL = 1e-4

REPORT_FIELDS = ("name", "lhs", "rhs", "ratio", "slack", "saturated", "numeric_error")


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    numeric_error: float = 0.0
    params: dict = field(default_factory=dict)
    saturation_tol: float = SATURATION_TOL

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return math.inf if self.lhs > 0 else 1.0
        return self.lhs / self.rhs

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def saturated(self) -> bool:
        return abs(self.ratio - 1.0) < self.saturation_tol

    def holds(self, tol: float = 0.0) -> bool:
        return self.ratio >= 1.0 - max(tol, self.numeric_error)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "ratio": float(self.ratio),
            "slack": float(self.slack),
            "saturated": bool(self.saturated),
            "numeric_error": float(self.numeric_error),
            "params": _plain(self.params),
        }

    def __str__(self) -> str:
        flag = " saturated" if self.saturated else ""
        return f"{self.name}: lhs={self.lhs:.10g} rhs={self.rhs:.10g} ratio={self.ratio:.10g}{flag}"


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _fmt_float(x: float, digits: int) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, f".{digits}g")


def _encode(v, digits: int) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return _fmt_float(v, digits)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_encode(x, digits)}" for k, x in v.items())
        return "{" + items + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_encode(x, digits) for x in v) + "]"
    return json.dumps(str(v))


def dumps_json(obj, digits: int = 17) -> str:
    """Deterministic JSON encoding with fixed float precision."""
    return _encode(_plain(obj), digits)


def reports_to_json(reports, config: dict | None = None) -> str:
    doc = {"config": config or {}, "reports": [r.to_dict() if isinstance(r, InequalityReport) else r for r in reports]}
    return dumps_json(doc) + "\n"


def _csv_cell(v, digits=12) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v, digits)
    if isinstance(v, (dict, list, tuple)):
        return dumps_json(v, digits)
    return "" if v is None else str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(_plain(row.get(c))) for c in columns])
    return buf.getvalue()


def reports_to_csv(reports) -> str:
    dicts = [r.to_dict() if isinstance(r, InequalityReport) else r for r in reports]
    keys = sorted({k for d in dicts for k in d.get("params", {})})
    columns = list(REPORT_FIELDS) + [f"param.{k}" for k in keys]
    rows = []
    for d in dicts:
        row = {k: d.get(k) for k in REPORT_FIELDS}
        row.update({f"param.{k}": v for k, v in d.get("params", {}).items()})
        rows.append(row)
    return rows_to_csv(rows, columns)
