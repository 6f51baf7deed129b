"""Online-to-offline conversion: render strokes as constant-thickness ink.

Images have a fixed height; width follows the ink's aspect ratio up to a
cap. Ink is binary (no anti-aliasing) so renders are exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import stamp_polyline
from .ink import OnlineHME, bounding_box


@dataclass(frozen=True)
class RasterConfig:
    target_height: int = 128
    max_width: int = 2048
    thickness: int = 3
    margin: int = 8
    background: int = 255
    ink: int = 0

    def __post_init__(self):
        if self.thickness < 1:
            raise ValueError("thickness must be >= 1")
        if self.target_height < 2 * self.margin + self.thickness:
            raise ValueError("target_height must be >= 2*margin + thickness")


@dataclass
class Image:
    pixels: np.ndarray  # (height, width) uint8, row-major

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def rasterize(hme: OnlineHME, config: RasterConfig = RasterConfig()) -> Image:
    """Render an expression: scale ink uniformly so its height fills the band
    between the margins, cap the width, and stamp each stroke as a polyline
    of ``thickness``-wide segments.

    Degenerate ink axes (a lone dot, a perfectly flat stroke) are centered
    on an integer pixel so thickness renders symmetrically.
    """
    if not hme.strokes:
        raise ValueError("no ink")
    box = bounding_box(hme.all_points())
    t = float(config.thickness)
    band_h = config.target_height - 2 * config.margin - config.thickness
    band_w_max = config.max_width - 2 * config.margin - config.thickness

    w, h = box.width, box.height
    if h > 0:
        scale = band_h / h
    elif w > 0:
        scale = band_h / w
    else:
        scale = 0.0
    if w > 0 and w * scale > band_w_max:
        scale = band_w_max / w

    width = 2 * config.margin + config.thickness + int(math.ceil(w * scale))
    height = config.target_height
    img = np.full((height, width), config.background, dtype=np.uint8)

    origin = config.margin + t / 2.0
    for stroke in hme.strokes:
        pts = stroke.points
        if len(pts) == 1:  # a dot is a zero-length segment
            pts = np.repeat(pts, 2, axis=0)
        if w > 0:
            xs = origin + (pts[:, 0] - box.min_x) * scale
        else:
            xs = np.full(len(pts), float(round(width / 2)))
        if h > 0:
            ys = origin + (pts[:, 1] - box.min_y) * scale
        else:
            ys = np.full(len(pts), float(round(height / 2)))
        stamp_polyline(img, xs, ys, t / 2.0, config.ink)
    return Image(img)


def draw_segment(
    image: Image,
    p0: tuple[float, float],
    p1: tuple[float, float],
    thickness: float,
    ink: int = 0,
) -> Image:
    """Ink every pixel within thickness/2 of the segment p0-p1, in place."""
    xs = np.array([p0[0], p1[0]], dtype=np.float64)
    ys = np.array([p0[1], p1[1]], dtype=np.float64)
    stamp_polyline(image.pixels, xs, ys, thickness / 2.0, ink)
    return image


def write_pgm(image: Image, path: str | Path) -> None:
    """Binary PGM (P5), lossless 8-bit grayscale."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes())


def read_pgm(path: str | Path) -> Image:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"not a binary PGM file: magic {fields[0]!r}")
    width, height = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data[pos + 1 :], dtype=np.uint8, count=width * height)
    return Image(pixels.reshape(height, width).copy())
