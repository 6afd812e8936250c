"""Versioned JSON reports emitted by every CLI command.

Reports are the machine-readable counterpart of the usual convergence and
rank-decay plots: config echo, results, and a timings block.  The schema
ships with the package; everything outside ``timings`` is deterministic for
a fixed seed.  Non-finite numbers are rendered as null so consumers never
see NaN or Inf.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

SCHEMA_VERSION = 1


def _clean(obj):
    """Recursively convert numpy scalars/arrays and map non-finite to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def build_report(command: str, config: dict, results: dict, timings: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": _clean(config),
        "results": _clean(results),
        "timings": _clean(timings),
    }


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2)


def load_schema() -> dict:
    text = resources.files("hodlrkit").joinpath("report_schema.json").read_text()
    return json.loads(text)


def strip_timings(report: dict) -> dict:
    """Copy of a report without the timings block, for determinism checks."""
    out = dict(report)
    out.pop("timings", None)
    return out
