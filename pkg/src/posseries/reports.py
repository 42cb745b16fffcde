"""Deterministic report rendering.

Floats are written with 12 significant digits; non-finite floats become the
strings "inf", "-inf" and "nan". Critical values additionally carry their
exact hex-float form. Field order is insertion order, so a given run always
produces the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

SCHEMA_ID = "posseries-report/1"
SIG_DIGITS = 12


def fmt(x: float) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


def clean(obj):
    """Recursively convert numpy scalars/arrays and round floats to 12 digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(fmt(x))
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return clean(obj.to_json())
    return str(obj)


def critical(name: str, x: float) -> dict:
    x = float(x)
    return {"name": name, "decimal": fmt(x), "hex": x.hex()}


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)
    critical: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    exit_code: int = 0

    def add_critical(self, name: str, x: float):
        self.critical.append(critical(name, x))

    def fail(self, exc: BaseException, exit_code: int):
        self.errors.append({"type": type(exc).__name__, "message": str(exc)})
        self.exit_code = exit_code

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_ID,
            "command": self.command,
            "status": "ok" if self.exit_code == 0 else "error",
            "exit_code": self.exit_code,
            "inputs": clean(self.inputs),
            "results": clean(self.results),
            "rows": clean(self.rows),
            "critical": self.critical,
            "notes": list(self.notes),
            "errors": self.errors,
        }

    def render(self, fmt_name: str = "json") -> str:
        if fmt_name == "json":
            return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"
        if fmt_name == "csv":
            return render_csv(self.rows)
        raise ValueError(f"unknown format {fmt_name!r}")


def _cell(v) -> str:
    v = clean(v)
    if isinstance(v, float):
        return fmt(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return "" if v is None else str(v)


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    header: list[str] = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in header])
    return buf.getvalue()


def load_schema() -> dict:
    return json.loads(resources.files("posseries").joinpath("report_schema.json").read_text())
