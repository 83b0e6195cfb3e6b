"""Deterministic CSV and JSON output.

Floats are written with 17 significant digits, so every value round-trips
exactly; the text never depends on the locale.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["format_float", "CsvWriter", "write_csv", "write_summary"]


def format_float(v):
    return f"{float(v):.17g}"


class CsvWriter:
    """Streaming writer: header on open, then blocks of equal-length columns."""

    def __init__(self, path, header):
        self.path = Path(path)
        self.header = list(header)
        self._fh = self.path.open("w", encoding="utf-8", newline="\n")
        self._fh.write(",".join(self.header) + "\n")
        self.rows = 0

    def write(self, columns):
        cols = [np.ravel(np.asarray(c, dtype=float)) for c in columns]
        if len(cols) != len(self.header):
            raise ValueError("header and columns differ in length")
        n = {c.size for c in cols}
        if len(n) > 1:
            raise ValueError(f"column lengths differ: {sorted(n)}")
        self._fh.writelines(",".join(format_float(v) for v in row) + "\n" for row in zip(*cols))
        self.rows += next(iter(n), 0)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(path, header, columns):
    """Write equal-length ``columns`` under ``header`` (one row per index)."""
    with CsvWriter(path, header) as w:
        w.write(columns)
    return Path(path)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no nan/inf
        return v if math.isfinite(v) else str(v)
    return obj


def write_summary(path, data):
    path = Path(path)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
