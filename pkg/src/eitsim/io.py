"""CSV and run-manifest writers."""

from __future__ import annotations

import csv
import json
import math
import numbers
import time
from pathlib import Path

from . import __version__


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        x = float(value)
        if math.isnan(x):
            return "NaN"
        return "%.17g" % x
    return str(value)


def write_csv(rows, path, header) -> None:
    """RFC-4180 CSV with a header line, ``\\n`` line endings and UTF-8."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(row.get(col, math.nan)) for col in header])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


def write_manifest(path, command: str, config: dict, outputs, wall_time: float, results=None) -> None:
    record = {
        "command": command,
        "tool": "eitsim",
        "version": __version__,
        "config": config,
        "outputs": [str(o) for o in outputs],
        "wall_time_s": wall_time,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "results": results or {},
    }
    Path(path).write_text(json.dumps(record, indent=2, default=_jsonable) + "\n", encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, numbers.Number):
        return float(obj)
    return str(obj)
