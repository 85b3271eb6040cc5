"""CSV and SVG artifacts."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import CSV_COLUMNS, TrajectoryRecord


def format_value(v: float) -> str:
    return format(float(v), ".17g")


def csv_text(record, columns: Sequence[str] = CSV_COLUMNS, every: int = 1) -> str:
    cols = [np.asarray(record.column(c) if hasattr(record, "column") else getattr(record, c))
            for c in columns]
    lines = [",".join(columns)]
    for i in range(0, len(cols[0]), every):
        lines.append(",".join(format_value(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def write_csv(record, path, columns: Sequence[str] = CSV_COLUMNS, every: int = 1) -> Path:
    path = Path(path)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(csv_text(record, columns, every))
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV as float arrays, keyed by header name."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if not header or header == [""]:
        raise ValueError(f"{path}: empty CSV")
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i + 2} has {len(row)} fields, header has {len(header)}")
    data = np.array([[float(v) for v in row] for row in rows], dtype=float).reshape(-1, len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


def record_from_columns(cols: dict[str, np.ndarray]) -> TrajectoryRecord:
    n = len(cols["tau"])
    nan = np.full(n, math.nan)
    names = [f for f in TrajectoryRecord.__dataclass_fields__ if f not in ("extra", "final")]
    kwargs = {f: cols.get(f, nan) for f in names}
    extra = {k: v for k, v in cols.items() if k not in kwargs}
    return TrajectoryRecord(**kwargs, extra=extra)


def svg_text(x, y, stroke: str = "black") -> str:
    """Polyline of ``(x, -y)`` in a square-unit viewBox padded by 5%."""
    x = np.asarray(x, dtype=float)
    y = -np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if len(x) == 0:
        raise ValueError("no finite points to draw")
    w, h = float(np.ptp(x)), float(np.ptp(y))
    span = max(w, h) or 1.0
    pad = 0.05 * span
    vx, vy = float(x.min()) - pad, float(y.min()) - pad
    vw, vh = (w or 0.0) + 2 * pad, (h or 0.0) + 2 * pad
    pts = " ".join(f"{a:.10g},{b:.10g}" for a, b in zip(x, y))
    sw = span / 400
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{vx:.10g} {vy:.10g} {vw:.10g} {vh:.10g}" preserveAspectRatio="xMidYMid meet">\n'
        f'<polyline fill="none" stroke="{stroke}" stroke-width="{sw:.6g}" points="{pts}"/>\n'
        "</svg>\n"
    )


def write_svg(x, y, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(svg_text(x, y))
    return path
