"""Report documents: fixed-order JSON plus a flat CSV of per-mu records.

Everything except the ``timing`` block is a pure function of the run
configuration, so two runs with the same configuration serialize to the same
bytes once timing is stripped.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__

CSV_COLUMNS = ("mu", "lower_margin", "upper_margin", "c_hat", "classification")
REPORT_KEYS = ("tool", "version", "command", "config", "records", "windows", "verdicts", "citations", "checks",
               "ok", "timing")


def plain(obj):
    """Convert numpy scalars/arrays, enums, tuples and dataclass-like reports to JSON-ready values."""
    if hasattr(obj, "as_dict"):
        return plain(obj.as_dict())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def window_pair(window):
    """``(nearest, farthest)`` -> ascending ``[lo, hi]`` (or ``None``)."""
    if window is None:
        return None
    return sorted(float(x) for x in window)


def make_report(command: str, config: dict, *, records=(), windows=None, verdicts=(), citations=(), checks=(),
                ok: bool = True, timing: dict | None = None) -> dict:
    doc = {
        "tool": "evlab",
        "version": __version__,
        "command": command,
        "config": plain(config),
        "records": plain(list(records)),
        "windows": plain(windows or {"right": None, "left": None}),
        "verdicts": plain(list(verdicts)),
        "citations": plain(list(citations)),
        "checks": plain(list(checks)),
        "ok": bool(ok),
        "timing": plain(timing or {}),
    }
    return {k: doc[k] for k in REPORT_KEYS}


def dumps(report: dict) -> str:
    # floats use repr, so parsing the text back recovers every value exactly
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


def without_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def records_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_csv_value(r.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_path_for(path) -> Path:
    return Path(path).with_suffix(".csv")


def write_report(path, report: dict, with_csv: bool = False) -> list:
    """Write the JSON report (and the per-mu CSV next to it); returns the written paths."""
    written = []
    if with_csv:
        target = csv_path_for(path)
        atomic_write(target, records_csv(report["records"]))
        written.append(target)
    atomic_write(path, dumps(report))
    written.append(Path(path))
    return written
