"""Geometric distortion of ink: per-symbol local models plus whole-expression
rotation and scaling.

Local models operate in a per-symbol frame of [0,100]^2 (the constants 50
and 100 in the shrink/perspective formulas assume that frame) and take
angles in degrees, converted to radians internally. A zero angle is the
identity for shear, shrink, and rotation; perspective intrinsically
rescales by 2/3 around the frame center even at zero angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ink import (
    FRAME_MID,
    OnlineHME,
    Stroke,
    Symbol,
    bounding_box,
    denormalize_from_frame,
    normalize_to_frame,
)

MODEL_NAMES = {
    1: "shear",
    2: "shrink",
    3: "perspective",
    4: "shrink+rotation",
    5: "perspective+rotation",
}

ALPHA_RANGE = (-10.0, 10.0)
BETA_RANGE = (-10.0, 10.0)
GAMMA_RANGE = (-10.0, 10.0)
K_RANGE = (0.7, 1.3)


class Axis(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class DistortionParams:
    """The five sampled variables plus axis choice; fully determines one pattern."""

    id: int
    axis: Axis
    alpha: float  # degrees
    beta: float   # degrees, used only by models 4 and 5
    k: float
    gamma: float  # degrees

    def __post_init__(self):
        if self.id not in MODEL_NAMES:
            raise ValueError(f"model id must be 1..5, got {self.id}")
        if not ALPHA_RANGE[0] <= self.alpha <= ALPHA_RANGE[1]:
            raise ValueError(f"alpha {self.alpha} outside {ALPHA_RANGE}")
        if not BETA_RANGE[0] <= self.beta <= BETA_RANGE[1]:
            raise ValueError(f"beta {self.beta} outside {BETA_RANGE}")
        if not GAMMA_RANGE[0] <= self.gamma <= GAMMA_RANGE[1]:
            raise ValueError(f"gamma {self.gamma} outside {GAMMA_RANGE}")
        if not K_RANGE[0] <= self.k <= K_RANGE[1]:
            raise ValueError(f"k {self.k} outside {K_RANGE}")

    def as_provenance(self) -> dict[str, str]:
        return {
            "id": str(self.id),
            "axis": self.axis.value,
            "alpha": repr(self.alpha),
            "beta": repr(self.beta),
            "k": repr(self.k),
            "gamma": repr(self.gamma),
        }


def sample_params(rng: np.random.Generator) -> DistortionParams:
    """Draw one parameter tuple: id and axis uniform discrete, angles and k
    uniform continuous over their declared ranges."""
    model_id = int(rng.integers(1, 6))
    axis = Axis.HORIZONTAL if int(rng.integers(0, 2)) == 0 else Axis.VERTICAL
    alpha = float(rng.uniform(*ALPHA_RANGE))
    beta = float(rng.uniform(*BETA_RANGE))
    k = float(rng.uniform(*K_RANGE))
    gamma = float(rng.uniform(*GAMMA_RANGE))
    return DistortionParams(model_id, axis, alpha, beta, k, gamma)


def apply_shear(points: np.ndarray, axis: Axis, alpha: float) -> np.ndarray:
    """Shift one coordinate linearly with the other: x' = x + y tan(a) or
    y' = y + x tan(a)."""
    if abs(alpha) >= 90.0:
        raise ValueError(f"shear angle {alpha} degenerate (|alpha| >= 90)")
    a = math.radians(alpha)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    out = pts.copy()
    if axis is Axis.HORIZONTAL:
        out[:, 0] = pts[:, 0] + pts[:, 1] * math.tan(a)
    else:
        out[:, 1] = pts[:, 1] + pts[:, 0] * math.tan(a)
    return out


def apply_shrink(points: np.ndarray, axis: Axis, alpha: float) -> np.ndarray:
    """Compress one coordinate by a factor that decreases along the other axis:
    vertical: x' = x (sin(pi/2 - a) - y sin(a)/100); horizontal mirrors it."""
    a = math.radians(alpha)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    out = pts.copy()
    factor = math.sin(math.pi / 2 - a)
    if axis is Axis.VERTICAL:
        out[:, 0] = pts[:, 0] * (factor - pts[:, 1] * math.sin(a) / 100.0)
    else:
        out[:, 1] = pts[:, 1] * (factor - pts[:, 0] * math.sin(a) / 100.0)
    return out


def apply_perspective(points: np.ndarray, axis: Axis, alpha: float) -> np.ndarray:
    """Foreshorten toward the frame center; the 2/3 scale and +50 shift are
    intrinsic, so zero angle is not the identity.

    vertical:   x' = 2/3 (x + 50 cos(4a (x-50)/100)),
                y' = 2/3 y (sin(pi/2 - a) - y sin(a)/100)
    horizontal: the symmetric form with x and y exchanged.
    """
    a = math.radians(alpha)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    out = np.empty_like(pts)
    factor = math.sin(math.pi / 2 - a)
    if axis is Axis.VERTICAL:
        out[:, 0] = (2.0 / 3.0) * (
            pts[:, 0] + 50.0 * np.cos(4.0 * a * (pts[:, 0] - 50.0) / 100.0)
        )
        out[:, 1] = (2.0 / 3.0) * pts[:, 1] * (factor - pts[:, 1] * math.sin(a) / 100.0)
    else:
        out[:, 0] = (2.0 / 3.0) * pts[:, 0] * (factor - pts[:, 0] * math.sin(a) / 100.0)
        out[:, 1] = (2.0 / 3.0) * (
            pts[:, 1] + 50.0 * np.cos(4.0 * a * (pts[:, 1] - 50.0) / 100.0)
        )
    return out


def apply_rotation(
    points: np.ndarray, angle: float, pivot: tuple[float, float] = (FRAME_MID, FRAME_MID)
) -> np.ndarray:
    """Rotate about a pivot: x' = x cos(t) + y sin(t), y' = -x sin(t) + y cos(t)
    relative to the pivot (an isometry)."""
    t = math.radians(angle)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    px, py = pivot
    dx = pts[:, 0] - px
    dy = pts[:, 1] - py
    out = np.empty_like(pts)
    out[:, 0] = px + dx * math.cos(t) + dy * math.sin(t)
    out[:, 1] = py - dx * math.sin(t) + dy * math.cos(t)
    return out


def apply_scaling(
    points: np.ndarray, k: float, pivot: tuple[float, float]
) -> np.ndarray:
    """Uniform scale about a pivot: x' = k x, y' = k y relative to the pivot."""
    if k <= 0:
        raise ValueError(f"scale factor must be positive, got {k}")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    px, py = pivot
    out = np.empty_like(pts)
    out[:, 0] = px + (pts[:, 0] - px) * k
    out[:, 1] = py + (pts[:, 1] - py) * k
    return out


def apply_local_model(points: np.ndarray, params: DistortionParams) -> np.ndarray:
    """Dispatch one local model by id on frame coordinates.

    Models 4 and 5 compose shrink/perspective with a rotation by beta about
    the frame center; models 1-3 leave beta unused.
    """
    if params.id == 1:
        return apply_shear(points, params.axis, params.alpha)
    if params.id == 2:
        return apply_shrink(points, params.axis, params.alpha)
    if params.id == 3:
        return apply_perspective(points, params.axis, params.alpha)
    if params.id == 4:
        return apply_rotation(apply_shrink(points, params.axis, params.alpha), params.beta)
    return apply_rotation(apply_perspective(points, params.axis, params.alpha), params.beta)


def distort_symbol(
    hme: OnlineHME, symbol: Symbol, params: DistortionParams
) -> list[np.ndarray]:
    """Distort one symbol's strokes in its own frame.

    The symbol is normalized to [0,100]^2, transformed by the selected local
    model, mapped back, and re-anchored so its bounding-box center stays
    where it was (inter-symbol layout must survive).
    """
    box = bounding_box(hme.symbol_points(symbol))
    new_points = []
    for idx in symbol.strokes:
        frame = normalize_to_frame(hme.strokes[idx].points, box)
        frame = apply_local_model(frame, params)
        new_points.append(denormalize_from_frame(frame, box))
    new_box = bounding_box(np.concatenate(new_points))
    shift_x = (box.min_x + box.max_x - new_box.min_x - new_box.max_x) / 2.0
    shift_y = (box.min_y + box.max_y - new_box.min_y - new_box.max_y) / 2.0
    return [pts + np.array([shift_x, shift_y]) for pts in new_points]


def distort_hme(hme: OnlineHME, params: DistortionParams) -> OnlineHME:
    """Distort every symbol with the shared local model, then rotate and scale
    the whole expression about its bounding-box center.

    Geometry only: labels, tree, latex, stroke order, and point counts are
    all preserved.
    """
    stroke_points: list[np.ndarray | None] = [None] * len(hme.strokes)
    for symbol in hme.symbols:
        for idx, pts in zip(symbol.strokes, distort_symbol(hme, symbol, params)):
            stroke_points[idx] = pts
    for i, pts in enumerate(stroke_points):
        if pts is None:  # stroke not owned by any symbol; keep as-is
            stroke_points[i] = hme.strokes[i].points

    pivot = bounding_box(np.concatenate(stroke_points)).center
    stroke_points = [
        apply_scaling(apply_rotation(pts, params.gamma, pivot), params.k, pivot)
        for pts in stroke_points
    ]

    provenance = dict(hme.provenance)
    provenance["strategy"] = "distortion"
    provenance.update(params.as_provenance())
    out = OnlineHME(
        strokes=[Stroke(pts) for pts in stroke_points],
        symbols=list(hme.symbols),
        srt=hme.srt.copy() if hme.srt is not None else None,
        latex=hme.latex,
        provenance=provenance,
    )
    out.validate()
    return out
