"""Procedural object layers.

Deterministic black glyphs on a fully transparent background, used as the
object layers pasted into layouts.  An import path for external RGBA PNG
layers lives in the data engine; these procedural ones keep the pipeline
self-contained.
"""

from __future__ import annotations

import numpy as np

BASE_STYLES = ("disc", "ring", "cross")
POLYGON_MIN_K = 3
POLYGON_MAX_K = 12

# style cycle assigned to category indices by default
DEFAULT_STYLE_CYCLE = (
    "disc",
    "ring",
    "cross",
    "polygon_3",
    "polygon_4",
    "polygon_5",
    "polygon_6",
    "polygon_8",
)


def parse_style(style: str) -> tuple[str, int]:
    """Split a style name into (kind, polygon vertex count)."""
    if style in BASE_STYLES:
        return style, 0
    if style.startswith("polygon_"):
        k = int(style.split("_", 1)[1])
        if not POLYGON_MIN_K <= k <= POLYGON_MAX_K:
            raise ValueError(f"polygon vertex count must be in 3..12, got {k}")
        return "polygon", k
    raise ValueError(f"unknown glyph style {style!r}")


def synthesize_layer(category_id: int, style: str, side: int) -> np.ndarray:
    """Render a deterministic glyph as an RGBA uint8 array of shape
    (side, side, 4) with straight alpha; glyph pixels are opaque black.

    The glyph is inset so adjacent edge-touching boxes can never merge two
    objects.  Opaque pixel fraction stays within [0.05, 0.6].
    """
    if side < 4:
        raise ValueError(f"side must be >= 4, got {side}")
    kind, k = parse_style(style)
    c = (side - 1) / 2.0
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    dx, dy = xx - c, yy - c
    d2 = dx * dx + dy * dy
    r_out = max(1, min(round(side * 7 / 16), (side - 2) // 2))

    if kind == "disc":
        # a pixel square is opaque iff it lies entirely inside the circle;
        # center-inclusion would push the opaque fraction past 0.6
        reach = r_out - np.sqrt(0.5)
        alpha = d2 <= reach * reach if reach > 0 else np.zeros((side, side), bool)
    elif kind == "ring":
        r_in = min(0.55 * r_out, r_out - 1.0)
        alpha = (d2 >= r_in * r_in) & (d2 <= r_out * r_out)
    elif kind == "cross":
        half_t = max(1.0, round(side * 3 / 16)) / 2.0
        vert = (np.abs(dx) <= half_t) & (np.abs(dy) <= r_out)
        horiz = (np.abs(dy) <= half_t) & (np.abs(dx) <= r_out)
        alpha = vert | horiz
    else:  # polygon
        phase = (category_id % 16) * (np.pi / 8.0)
        angles = phase + 2.0 * np.pi * np.arange(k) / k - np.pi / 2.0
        vx = c + r_out * np.cos(angles)
        vy = c + r_out * np.sin(angles)
        alpha = np.ones((side, side), dtype=bool)
        for i in range(k):
            j = (i + 1) % k
            ex, ey = vx[j] - vx[i], vy[j] - vy[i]
            cross = ex * (yy - vy[i]) - ey * (xx - vx[i])
            alpha &= cross >= 0.0
    if alpha.sum() < max(4, 0.05 * side * side):
        # tiny-side fallback keeps the glyph visible and countable
        r = int(np.ceil(side / 4))
        alpha = d2 <= r * r
    layer = np.zeros((side, side, 4), dtype=np.uint8)
    layer[..., 3] = np.where(alpha, 255, 0)
    return layer


def opaque_fraction(layer: np.ndarray) -> float:
    return float((layer[..., 3] > 0).mean())
