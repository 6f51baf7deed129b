"""Core data model for online handwritten math expressions.

Coordinates are real-valued throughout (quantization happens only at
rasterization) and use the screen convention: y grows downward. All
containers are treated as immutable after construction; stroke point
arrays are marked read-only so transforms must produce new arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import StructureError


class PenPoint(NamedTuple):
    x: float
    y: float


class Stroke:
    """A pen-down-to-pen-up sequence of sampled points, stored as an (N, 2) float array."""

    __slots__ = ("points",)

    def __init__(self, points: Iterable[tuple[float, float]] | np.ndarray):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
            raise ValueError("empty point set")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinates")
        if pts.base is not None or not pts.flags.owndata:
            pts = pts.copy()
        pts.flags.writeable = False
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self) -> Iterator[PenPoint]:
        return (PenPoint(float(x), float(y)) for x, y in self.points)

    def __repr__(self) -> str:
        return f"Stroke({len(self)} points)"


class BoundingBox(NamedTuple):
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    @property
    def center(self) -> tuple[float, float]:
        return (self.min_x + self.max_x) / 2.0, (self.min_y + self.max_y) / 2.0


@dataclass(frozen=True)
class Symbol:
    """A labeled group of strokes forming one math symbol.

    ``strokes`` holds indices into the owning expression's stroke list.
    """

    id: str
    label: str
    strokes: tuple[int, ...]

    def __post_init__(self):
        if not self.strokes:
            raise StructureError(f"symbol {self.id!r} owns no strokes")
        if len(set(self.strokes)) != len(self.strokes):
            raise StructureError(f"symbol {self.id!r} has duplicate stroke indices")


class RelationLabel(Enum):
    RIGHT = "right"
    SUBSCRIPT = "subscript"
    SUPERSCRIPT = "superscript"
    OVER = "over"
    UNDER = "under"
    INSIDE = "inside"


# Fixed child ordering used by traversals so every walk is deterministic.
RELATION_ORDER = (
    RelationLabel.OVER,
    RelationLabel.UNDER,
    RelationLabel.INSIDE,
    RelationLabel.SUBSCRIPT,
    RelationLabel.SUPERSCRIPT,
    RelationLabel.RIGHT,
)


@dataclass
class SrtNode:
    """One node of a symbol relation tree: a symbol plus its outgoing relation edges."""

    symbol_id: str
    label: str
    children: dict[RelationLabel, "SrtNode"] = field(default_factory=dict)

    def child(self, rel: RelationLabel) -> "SrtNode | None":
        return self.children.get(rel)

    def attach(self, rel: RelationLabel, node: "SrtNode") -> None:
        if rel in self.children:
            raise StructureError(
                f"node {self.label!r} already has a {rel.value} child"
            )
        self.children[rel] = node

    def copy(self) -> "SrtNode":
        return SrtNode(
            self.symbol_id,
            self.label,
            {rel: node.copy() for rel, node in self.children.items()},
        )

    def baseline_tail(self) -> "SrtNode":
        """Last node of the RIGHT chain starting at this node."""
        node = self
        while (nxt := node.child(RelationLabel.RIGHT)) is not None:
            node = nxt
        return node


@dataclass
class SymbolRelationTree:
    """Symbols linked by spatial relations; single root, acyclic, one child per label."""

    root: SrtNode

    def nodes(self) -> list[SrtNode]:
        """Pre-order traversal in the fixed relation order."""
        out: list[SrtNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            out.append(node)
            for rel in reversed(RELATION_ORDER):
                child = node.child(rel)
                if child is not None:
                    stack.append(child)
        return out

    def edges(self) -> list[tuple[str, RelationLabel, str]]:
        out = []
        for node in self.nodes():
            for rel in RELATION_ORDER:
                child = node.child(rel)
                if child is not None:
                    out.append((node.symbol_id, rel, child.symbol_id))
        return out

    def symbol_ids(self) -> list[str]:
        return [n.symbol_id for n in self.nodes()]

    def __len__(self) -> int:
        return len(self.nodes())

    def copy(self) -> "SymbolRelationTree":
        return SymbolRelationTree(self.root.copy())

    def validate(self, symbols: list[Symbol]) -> None:
        ids = self.symbol_ids()
        if len(set(ids)) != len(ids):
            raise StructureError("symbol appears more than once in the tree")
        if set(ids) != {s.id for s in symbols}:
            raise StructureError("tree symbols do not match the expression's symbols")


@dataclass
class OnlineHME:
    """A complete online expression: strokes, segmentation, relation tree, and ground truth."""

    strokes: list[Stroke]
    symbols: list[Symbol]
    srt: SymbolRelationTree | None
    latex: str
    provenance: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        owned: list[int] = []
        for sym in self.symbols:
            for idx in sym.strokes:
                if not 0 <= idx < len(self.strokes):
                    raise StructureError(
                        f"symbol {sym.id!r} references stroke {idx} of {len(self.strokes)}"
                    )
                owned.append(idx)
        if self.symbols and sorted(owned) != list(range(len(self.strokes))):
            raise StructureError("every stroke must be owned by exactly one symbol")
        if self.srt is not None:
            self.srt.validate(self.symbols)

    def symbol_points(self, symbol: Symbol) -> np.ndarray:
        """All points of a symbol's strokes as one (N, 2) array."""
        return np.concatenate([self.strokes[i].points for i in symbol.strokes])

    def all_points(self) -> np.ndarray:
        return np.concatenate([s.points for s in self.strokes])


def bounding_box(points: Iterable[tuple[float, float]] | np.ndarray) -> BoundingBox:
    """Tight axis-aligned box over a non-empty point set."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("empty point set")
    pts = pts.reshape(-1, 2)
    mins = pts.min(axis=0)
    maxs = pts.max(axis=0)
    return BoundingBox(float(mins[0]), float(mins[1]), float(maxs[0]), float(maxs[1]))


FRAME_SIDE = 100.0
FRAME_MID = 50.0


def normalize_to_frame(points: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Affine map of ``box`` onto the [0,100]^2 frame.

    A degenerate (zero-extent) axis maps to the frame midpoint 50 so that
    single-dot symbols still transform without division by zero.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    out = np.empty_like(pts)
    if box.width > 0:
        out[:, 0] = (pts[:, 0] - box.min_x) / box.width * FRAME_SIDE
    else:
        out[:, 0] = FRAME_MID
    if box.height > 0:
        out[:, 1] = (pts[:, 1] - box.min_y) / box.height * FRAME_SIDE
    else:
        out[:, 1] = FRAME_MID
    return out


def denormalize_from_frame(points: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Inverse of :func:`normalize_to_frame` for the same box.

    On a degenerate axis the inverse scale is zero: every frame coordinate
    maps back to the box's constant coordinate on that axis.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    out = np.empty_like(pts)
    if box.width > 0:
        out[:, 0] = box.min_x + pts[:, 0] / FRAME_SIDE * box.width
    else:
        out[:, 0] = box.min_x
    if box.height > 0:
        out[:, 1] = box.min_y + pts[:, 1] / FRAME_SIDE * box.height
    else:
        out[:, 1] = box.min_y
    return out
