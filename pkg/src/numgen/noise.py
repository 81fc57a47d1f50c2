"""Initial-noise construction and count-aware priors.

Three ways to fold a target layout into the starting noise of a sampler:
multiplicative in-box scaling, replacement by a canonical fixed sample, and
additive Gaussian bumps centered on each box.  Boxes arrive in pixel space
and are mapped into the noise grid first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .layout import LayoutSpec

GAUSSIAN_CUTOFF_SIGMAS = 5.0  # bump support radius; exactly zero beyond

LatentBox = tuple[float, float, float, float]  # (x, y, w, h) in grid units


@dataclass
class PriorConfig:
    """Parameters for one noise-prior method.

    method: "uniform_scaled" (scale in-box noise by gamma), "fixed"
    (replace in-box noise with a canonical sample), or "gaussian" (add a
    bump of weight w per box with sigma = alpha * |(box_w, box_h)|_2).
    """

    method: str
    gamma: float = 0.1
    fixed_seed: int = 0
    w: float = 0.3
    alpha: float = 0.8

    def __post_init__(self):
        if self.method not in ("uniform_scaled", "fixed", "gaussian"):
            raise ValueError(f"unknown prior method {self.method!r}")


def sample_noise(channels: int, h: int, w: int, seed: int) -> np.ndarray:
    """I.i.d. standard normal noise, float32, shape (channels, h, w)."""
    if channels < 1 or h < 1 or w < 1:
        raise ValueError("noise dims must be positive")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((channels, h, w), dtype=np.float32)


def map_boxes_to_latent(layout: LayoutSpec, latent_h: int, latent_w: int) -> list[LatentBox]:
    """Scale pixel boxes into noise-grid coordinates, kept as reals."""
    sx = latent_w / layout.canvas_w
    sy = latent_h / layout.canvas_h
    return [(b.x * sx, b.y * sy, b.w * sx, b.h * sy) for b in layout.boxes]


def _axis_coverage(lo: float, size: float, n: int) -> np.ndarray:
    """Covered fraction of each unit cell [j, j+1) along one axis."""
    j = np.arange(n, dtype=np.float64)
    return np.clip(np.minimum(lo + size, j + 1.0) - np.maximum(lo, j), 0.0, 1.0)


def rasterize_box(box: LatentBox, h: int, w: int) -> np.ndarray:
    """Boolean cell mask of a real-valued box: a cell belongs iff strictly
    more than half of its area is covered."""
    x, y, bw, bh = box
    cov = np.outer(_axis_coverage(y, bh, h), _axis_coverage(x, bw, w))
    return cov > 0.5


def rasterize_union(boxes: list[LatentBox], h: int, w: int) -> np.ndarray:
    mask = np.zeros((h, w), dtype=bool)
    for box in boxes:
        mask |= rasterize_box(box, h, w)
    return mask


def _check_boxes_within(boxes: list[LatentBox], h: int, w: int) -> None:
    for box in boxes:
        x, y, bw, bh = box
        if x < 0 or y < 0 or x + bw > w + 1e-9 or y + bh > h + 1e-9:
            raise ValueError(f"latent box {box} leaves the {w}x{h} grid")


def apply_uniform_scaled(noise: np.ndarray, latent_boxes: list[LatentBox], gamma: float) -> np.ndarray:
    """Multiply noise values inside any box by gamma; cells outside all
    boxes are bit-identical to the input.  Overlaps scale once."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    c, h, w = noise.shape
    _check_boxes_within(latent_boxes, h, w)
    out = noise.copy()
    if latent_boxes:
        mask = rasterize_union(latent_boxes, h, w)
        out[:, mask] *= np.float32(gamma)
    return out


def apply_fixed(noise: np.ndarray, latent_boxes: list[LatentBox], fixed_seed: int) -> np.ndarray:
    """Overwrite each box region with the same canonical sample, cropped
    from a full-grid field anchored at the box's top-left cell."""
    c, h, w = noise.shape
    _check_boxes_within(latent_boxes, h, w)
    out = noise.copy()
    if not latent_boxes:
        return out
    canonical = sample_noise(c, h, w, fixed_seed)
    for box in latent_boxes:
        mask = rasterize_box(box, h, w)
        if not mask.any():
            continue
        rows, cols = np.nonzero(mask)
        r0, c0 = rows.min(), cols.min()
        out[:, rows, cols] = canonical[:, rows - r0, cols - c0]
    return out


def apply_gaussian_kernel(noise: np.ndarray, latent_boxes: list[LatentBox],
                          w: float, alpha: float) -> np.ndarray:
    """Add one isotropic Gaussian bump of weight w per box, centered on the
    box and with sigma = alpha * hypot(box_w, box_h), summed over boxes and
    applied identically to every channel.  The bump is truncated to exact
    zero beyond 5 sigma."""
    _, grid_h, grid_w = noise.shape
    bump = np.zeros((grid_h, grid_w), dtype=np.float32)
    for box in latent_boxes:
        bx, by, bw, bh = box
        sigma = alpha * math.hypot(bw, bh)
        if sigma <= 0:
            raise ValueError(f"zero-area box {box} gives sigma = 0")
        mu_x = bx + bw / 2.0
        mu_y = by + bh / 2.0
        reach = GAUSSIAN_CUTOFF_SIGMAS * sigma
        r0 = max(0, int(math.floor(mu_y - reach - 0.5)))
        r1 = min(grid_h, int(math.ceil(mu_y + reach - 0.5)) + 1)
        c0 = max(0, int(math.floor(mu_x - reach - 0.5)))
        c1 = min(grid_w, int(math.ceil(mu_x + reach - 0.5)) + 1)
        if r0 >= r1 or c0 >= c1:
            continue
        ys = np.arange(r0, r1, dtype=np.float32) + np.float32(0.5)
        xs = np.arange(c0, c1, dtype=np.float32) + np.float32(0.5)
        d2 = (ys[:, None] - np.float32(mu_y)) ** 2 + (xs[None, :] - np.float32(mu_x)) ** 2
        local = np.float32(w) * np.exp(-0.5 * d2 / np.float32(sigma) ** 2)
        local[d2 > np.float32(reach) ** 2] = 0.0
        bump[r0:r1, c0:c1] += local
    return noise + bump[None, :, :]


def apply_prior(noise: np.ndarray, latent_boxes: list[LatentBox], config: PriorConfig) -> np.ndarray:
    if config.method == "uniform_scaled":
        return apply_uniform_scaled(noise, latent_boxes, config.gamma)
    if config.method == "fixed":
        return apply_fixed(noise, latent_boxes, config.fixed_seed)
    return apply_gaussian_kernel(noise, latent_boxes, config.w, config.alpha)
