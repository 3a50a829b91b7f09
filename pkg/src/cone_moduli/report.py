"""Report assembly and serialization (JSON + CSV).

Complex numbers serialize as {"re": ..., "im": ...}; all nondeterministic
fields (timestamp, timings) live under the isolated "runtime" key so the
rest of the JSON is byte-identical for a fixed config, seed, and the
deterministic-reduction flag.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone

import numpy as np

from cone_moduli import __version__
from cone_moduli.errors import IoFailure

CONVENTIONS = {
    "measure": "dx dy / pi  (|dz|^2 = dz wedge dzbar / (-2 pi i))",
    "tv_potential": "Hessian of -log(area) (ball-model sign, positive definite)",
    "wp_gram": "transpose(inverse(cometric Gram of R_j))",
    "duality_sign": "pairing(R_j, d/du_k) = -delta_jk",
}


def encode_value(v):
    """Recursively JSON-encode complex numbers, arrays and numpy scalars."""
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.complexfloating,)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [encode_value(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {k: encode_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    return v


def decode_value(v):
    """Inverse of encode_value for {"re","im"} leaves (dicts/lists recursed)."""
    if isinstance(v, dict):
        if set(v) == {"re", "im"}:
            return complex(v["re"], v["im"])
        return {k: decode_value(x) for k, x in v.items()}
    if isinstance(v, list):
        return [decode_value(x) for x in v]
    return v


def assemble_report(config_echo: dict, checks_enabled: dict, points: list[dict],
                    per_angle_set: list[dict], summary: dict,
                    runtime: dict | None = None) -> dict:
    report = {
        "tool": {"name": "cone-moduli", "version": __version__},
        "conventions": dict(CONVENTIONS),
        "config": encode_value(config_echo),
        "checks_enabled": dict(checks_enabled),
        "points": [encode_value(p) for p in points],
        "per_angle_set": [encode_value(s) for s in per_angle_set],
        "summary": encode_value(summary),
    }
    report["runtime"] = runtime or {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seconds_total": None,
        "per_point_seconds": [],
    }
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False)


def emit(report: dict, fmt: str, path: str) -> None:
    """Write the report as json (full nested) or csv (one row per
    point x enabled check)."""
    try:
        if fmt == "json":
            with open(path, "w") as fh:
                fh.write(report_json(report))
                fh.write("\n")
        elif fmt == "csv":
            rows = csv_rows(report)
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, delimiter=",")
                writer.writerow(["point_id", "check", "value", "tolerance", "pass"])
                writer.writerows(rows)
        else:
            raise IoFailure(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def csv_rows(report: dict) -> list[list]:
    """Exactly one row per (point, enabled check)."""
    enabled = [name for name, on in report["checks_enabled"].items() if on]
    rows = []
    for pt in report["points"]:
        for check in enabled:
            block = pt.get(check) or {}
            value = block.get("value")
            tol = block.get("tolerance")
            ok = block.get("pass")
            rows.append([pt["point_id"], check,
                         "" if value is None else repr(float(value)),
                         "" if tol is None else repr(float(tol)),
                         "" if ok is None else str(bool(ok))])
    return rows


def parse_json_report(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IoFailure(f"cannot read report {path}: {exc}") from exc
