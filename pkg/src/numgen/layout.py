"""Object placement planning.

Two strategies: rejection-sampled random non-overlapping layouts with
count-dependent object sizing, and a fixed grid filled row-major from the
top-left.  All randomness flows from the explicit seed argument, so planning
is safe to run from many workers at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .seeds import derive_seed

MIN_SIDE = 4
_CHUNK = 64  # candidate positions drawn per RNG call


class PlacementFailure(RuntimeError):
    """Raised when an object exhausts its placement attempts."""

    def __init__(self, object_index: int, count: int, max_attempts: int):
        self.object_index = object_index
        super().__init__(
            f"could not place object {object_index} of {count} "
            f"within {max_attempts} attempts"
        )


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in integer pixels; (x, y) is the top-left corner."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box sides must be positive, got {self.w}x{self.h}")

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, d: dict) -> "BBox":
        return cls(int(d["x"]), int(d["y"]), int(d["w"]), int(d["h"]))


@dataclass
class LayoutSpec:
    canvas_w: int
    canvas_h: int
    boxes: list[BBox] = field(default_factory=list)
    layout_type: str = "random"
    seed: int = 0

    @property
    def count(self) -> int:
        return len(self.boxes)

    def validate(self) -> None:
        for i, b in enumerate(self.boxes):
            if b.x < 0 or b.y < 0 or b.x + b.w > self.canvas_w or b.y + b.h > self.canvas_h:
                raise ValueError(f"box {i} leaves the canvas: {b}")
        for i in range(len(self.boxes)):
            for j in range(i + 1, len(self.boxes)):
                if boxes_overlap(self.boxes[i], self.boxes[j]):
                    raise ValueError(f"boxes {i} and {j} overlap")

    def to_dict(self) -> dict:
        return {
            "canvas_w": self.canvas_w,
            "canvas_h": self.canvas_h,
            "count": self.count,
            "layout_type": self.layout_type,
            "seed": self.seed,
            "boxes": [b.to_dict() for b in self.boxes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LayoutSpec":
        spec = cls(
            canvas_w=int(d["canvas_w"]),
            canvas_h=int(d["canvas_h"]),
            boxes=[BBox.from_dict(b) for b in d["boxes"]],
            layout_type=str(d["layout_type"]),
            seed=int(d["seed"]),
        )
        if "count" in d and int(d["count"]) != spec.count:
            raise ValueError("layout count field disagrees with box list")
        return spec


def boxes_overlap(a: BBox, b: BBox) -> bool:
    """True iff the open interiors intersect; edge-touching boxes do not."""
    return a.x < b.x + b.w and b.x < a.x + a.w and a.y < b.y + b.h and b.y < a.y + a.h


def object_side_for_count(
    count: int, canvas_w: int, canvas_h: int, fill_fraction: float = 0.25
) -> int:
    """Side of the square object slot that lets `count` objects cover about
    `fill_fraction` of the canvas: floor(sqrt(fill * W * H / count)), clamped
    to [4, min(W, H)]."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not 0.0 < fill_fraction <= 1.0:
        raise ValueError(f"fill_fraction must be in (0, 1], got {fill_fraction}")
    target = fill_fraction * canvas_w * canvas_h / count
    side = int(math.sqrt(target))
    while (side + 1) * (side + 1) <= target:
        side += 1
    while side > 0 and side * side > target:
        side -= 1
    return max(MIN_SIDE, min(side, min(canvas_w, canvas_h)))


def plan_random_layout(
    count: int,
    canvas_w: int,
    canvas_h: int,
    fill_fraction: float = 0.25,
    max_attempts: int = 1000,
    seed: int = 0,
    variable_size: bool = False,
) -> LayoutSpec:
    """Place `count` equal-sized square boxes by rejection sampling.

    Each object draws uniform positions x in [0, W-side], y in [0, H-side]
    until one does not overlap an already-placed box, up to `max_attempts`.
    Raises PlacementFailure (with the failing object index) on exhaustion.
    With `variable_size`, each object's side is jittered by a uniform factor
    in [0.7, 1.3] before placement.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    spec = LayoutSpec(canvas_w, canvas_h, layout_type="random", seed=seed)
    if count == 0:
        return spec
    base_side = object_side_for_count(count, canvas_w, canvas_h, fill_fraction)
    rng = np.random.default_rng(seed)
    placed = np.empty((count, 4), dtype=np.int64)
    for i in range(count):
        side = base_side
        if variable_size:
            factor = rng.uniform(0.7, 1.3)
            side = max(MIN_SIDE, min(int(round(base_side * factor)), min(canvas_w, canvas_h)))
        remaining = max_attempts
        pos = None
        while remaining > 0:
            n = min(_CHUNK, remaining)
            xs = rng.integers(0, canvas_w - side + 1, size=n)
            ys = rng.integers(0, canvas_h - side + 1, size=n)
            j = _kernels.first_free(xs, ys, side, side, placed[:i])
            if j >= 0:
                pos = (int(xs[j]), int(ys[j]))
                break
            remaining -= n
        if pos is None:
            raise PlacementFailure(i, count, max_attempts)
        placed[i] = (pos[0], pos[1], side, side)
        spec.boxes.append(BBox(pos[0], pos[1], side, side))
    return spec


def plan_grid_layout(
    count: int, canvas_w: int, canvas_h: int, rows: int = 7, cols: int = 7
) -> LayoutSpec:
    """Fill grid cells row-major from the top-left; each box is the cell
    rectangle shrunk by a 10% margin per side.  Seed-independent."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count > rows * cols:
        raise ValueError(f"count {count} exceeds grid capacity {rows * cols}")
    cell_w = canvas_w / cols
    cell_h = canvas_h / rows
    spec = LayoutSpec(canvas_w, canvas_h, layout_type="grid", seed=0)
    for i in range(count):
        r, c = divmod(i, cols)
        x0 = math.ceil(c * cell_w + 0.1 * cell_w)
        x1 = math.floor((c + 1) * cell_w - 0.1 * cell_w)
        y0 = math.ceil(r * cell_h + 0.1 * cell_h)
        y1 = math.floor((r + 1) * cell_h - 0.1 * cell_h)
        if x1 - x0 < 1 or y1 - y0 < 1:
            raise ValueError(f"grid cells too small on a {canvas_w}x{canvas_h} canvas")
        spec.boxes.append(BBox(x0, y0, x1 - x0, y1 - y0))
    return spec


def layout_seed_for_record(master_seed: int, record_index: int) -> int:
    """Per-record layout seed (see numgen.seeds for the splitting rule)."""
    return derive_seed(master_seed, record_index)
