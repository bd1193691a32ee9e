"""Delimited-text output with self-describing metadata headers.

All emitted tables are comma-separated, floats printed with 17 significant
digits, preceded by '#'-prefixed header lines carrying the resolved
configuration and input hashes, so any row can be re-derived.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if value is None:
        return ""
    return str(value)


def config_hash(obj) -> str:
    """Stable hash of a configuration mapping or dataclass-ish repr."""
    if hasattr(obj, "__dict__"):
        obj = vars(obj)
    if isinstance(obj, dict):
        text = ",".join(f"{k}={obj[k]!r}" for k in sorted(obj))
    else:
        text = repr(obj)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def write_table(path, rows: list[dict], meta: dict | None = None) -> None:
    """Write dict rows as CSV with '#' metadata header lines."""
    path = Path(path)
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {fmt(value)}")
    if rows:
        columns = list(rows[0].keys())
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(fmt(row.get(c)) for c in columns))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_matrix(path, matrix: np.ndarray, meta: dict | None = None) -> None:
    """Write a dense matrix as CSV rows with '#' metadata header lines."""
    path = Path(path)
    lines = [f"# {k} = {fmt(v)}" for k, v in (meta or {}).items()]
    for row in np.atleast_2d(np.asarray(matrix, dtype=float)):
        lines.append(",".join(f"{x:.17g}" for x in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_spectrum(path, omega: np.ndarray, spectrum: np.ndarray,
                   meta: dict | None = None) -> None:
    rows = [{"omega": float(w), "a": float(a)} for w, a in zip(omega, spectrum)]
    write_table(path, rows, meta)
