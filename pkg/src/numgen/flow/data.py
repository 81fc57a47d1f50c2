"""Dataset loading for the flow model."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data_engine import load_manifest
from ..layout import LayoutSpec
from ..noise import LatentBox, map_boxes_to_latent
from ..oracle import load_image


def image_to_unit(img: np.ndarray) -> np.ndarray:
    """uint8 grayscale image -> float32 in [-1, 1]."""
    return (img.astype(np.float32) / 127.5) - 1.0


def unit_to_image(x: np.ndarray) -> np.ndarray:
    """float32 in [-1, 1] -> uint8 image."""
    return np.clip(np.rint((x + 1.0) * 127.5), 0, 255).astype(np.uint8)


@dataclass
class FlowDataset:
    x0: np.ndarray                       # (N, 1, H, W) float32 in [-1, 1]
    counts: np.ndarray                   # (N,) int64
    latent_boxes: list[list[LatentBox]]  # per-sample boxes in grid coordinates
    background_gray: int


def load_training_set(manifest_path: str | Path) -> FlowDataset:
    """Load a generated dataset as single-channel training arrays; layouts
    are mapped to the noise grid (identical to the pixel grid here)."""
    manifest_path = Path(manifest_path)
    records = load_manifest(manifest_path)
    if not records:
        raise ValueError(f"{manifest_path}: empty manifest")
    images = []
    counts = []
    boxes = []
    bg = int(records[0].get("background_gray", 200))
    for rec in records:
        img = load_image(manifest_path.parent / rec["image_path"])
        # gray-backed scenes have identical channels; keep one
        images.append(image_to_unit(img[:, :, 0])[None, :, :])
        counts.append(int(rec["count"]))
        layout = LayoutSpec.from_dict(rec["layout"])
        h, w = img.shape[:2]
        boxes.append(map_boxes_to_latent(layout, h, w))
    return FlowDataset(np.stack(images), np.asarray(counts, dtype=np.int64), boxes, bg)
