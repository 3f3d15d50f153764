"""CSV records and PGM heatmaps."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from ..attention import AttentionVector
from ..errors import LengthMismatch
from ..pruner import TokenGrid


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.9g}"
    return str(v)


def rows_to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def heatmap_pixels(a_q, grid: TokenGrid) -> np.ndarray:
    """Min-max normalize scores to 0..255 on a ``(grid_h, grid_w)`` raster.

    Constant vectors map to mid-gray 128.
    """
    s = a_q.scores if isinstance(a_q, AttentionVector) else np.asarray(a_q, dtype=np.float64)
    if s.size != grid.n_tokens:
        raise LengthMismatch(f"{s.size} scores for a {grid.grid_w}x{grid.grid_h} grid")
    lo, hi = s.min(), s.max()
    if hi == lo:
        px = np.full(s.size, 128, dtype=np.uint8)
    else:
        px = np.rint(255.0 * (s - lo) / (hi - lo)).astype(np.uint8)
    return px.reshape(grid.grid_h, grid.grid_w)


def write_pgm(pixels: np.ndarray, out_path) -> None:
    h, w = pixels.shape
    data = f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()
    Path(out_path).write_bytes(data)


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, dims, maxval, body = raw.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError(f"{path} is not an 8-bit binary PGM")
    w, h = map(int, dims.split())
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w)


def emit_heatmap(a_q, grid: TokenGrid, out_path) -> None:
    write_pgm(heatmap_pixels(a_q, grid), out_path)
