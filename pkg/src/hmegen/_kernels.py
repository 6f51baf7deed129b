"""Rasterization inner loops: numba-compiled with a pure-numpy fallback.

Set ``HMEGEN_DISABLE_NUMBA=1`` to select the numpy path (also used when
numba is not importable). Both paths evaluate the same float64 arithmetic
in the same order, so they produce bit-identical images; the benchmark in
benchmarks/bench_kernels.py compares their speed.

A pixel at row r, column c samples the continuous point (c, r). It is ink
when its squared distance to the nearest point of a segment is <= radius^2.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _numba_disabled() -> bool:
    return os.environ.get("HMEGEN_DISABLE_NUMBA", "").strip().lower() in (
        "1",
        "true",
        "yes",
    )


def stamp_polyline_numpy(
    img: np.ndarray, xs: np.ndarray, ys: np.ndarray, radius: float, value: int
) -> None:
    """Ink all pixels within ``radius`` of the polyline, vectorized per segment."""
    h, w = img.shape
    r2 = radius * radius
    for i in range(len(xs) - 1):
        x0, y0 = xs[i], ys[i]
        x1, y1 = xs[i + 1], ys[i + 1]
        cmin = max(int(math.floor(min(x0, x1) - radius)), 0)
        cmax = min(int(math.ceil(max(x0, x1) + radius)), w - 1)
        rmin = max(int(math.floor(min(y0, y1) - radius)), 0)
        rmax = min(int(math.ceil(max(y0, y1) + radius)), h - 1)
        if cmax < cmin or rmax < rmin:
            continue
        cols = np.arange(cmin, cmax + 1, dtype=np.float64)
        rows = np.arange(rmin, rmax + 1, dtype=np.float64)
        c, r = np.meshgrid(cols, rows)
        dx = x1 - x0
        dy = y1 - y0
        l2 = dx * dx + dy * dy
        if l2 > 0.0:
            t = ((c - x0) * dx + (r - y0) * dy) / l2
            np.clip(t, 0.0, 1.0, out=t)
        else:
            t = np.zeros_like(c)
        ex = c - (x0 + t * dx)
        ey = r - (y0 + t * dy)
        mask = ex * ex + ey * ey <= r2
        sub = img[rmin : rmax + 1, cmin : cmax + 1]
        sub[mask] = value


def _stamp_polyline_loops(img, xs, ys, radius, value):
    # Compiled by numba below; kept importable for direct comparison tests.
    h, w = img.shape
    r2 = radius * radius
    for i in range(len(xs) - 1):
        x0 = xs[i]
        y0 = ys[i]
        x1 = xs[i + 1]
        y1 = ys[i + 1]
        cmin = max(int(math.floor(min(x0, x1) - radius)), 0)
        cmax = min(int(math.ceil(max(x0, x1) + radius)), w - 1)
        rmin = max(int(math.floor(min(y0, y1) - radius)), 0)
        rmax = min(int(math.ceil(max(y0, y1) + radius)), h - 1)
        dx = x1 - x0
        dy = y1 - y0
        l2 = dx * dx + dy * dy
        for rr in range(rmin, rmax + 1):
            for cc in range(cmin, cmax + 1):
                if l2 > 0.0:
                    t = ((cc - x0) * dx + (rr - y0) * dy) / l2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                else:
                    t = 0.0
                ex = cc - (x0 + t * dx)
                ey = rr - (y0 + t * dy)
                if ex * ex + ey * ey <= r2:
                    img[rr, cc] = value


NUMBA_ENABLED = False
stamp_polyline_njit = None

if not _numba_disabled():
    try:
        import numba
    except ImportError:
        pass
    else:
        stamp_polyline_njit = numba.njit(cache=True)(_stamp_polyline_loops)
        NUMBA_ENABLED = True

stamp_polyline = stamp_polyline_njit if NUMBA_ENABLED else stamp_polyline_numpy
