"""Count-exact image rendering and dataset emission.

Layouts from the planner are turned into images by alpha-compositing one
object layer per scene onto a uniform gray canvas; records are written as
PNG files plus a JSONL manifest.  Record generation is embarrassingly
parallel: every record derives its own seed from the master seed and its
record index, so workers never share RNG state.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .glyphs import DEFAULT_STYLE_CYCLE, synthesize_layer
from .layout import LayoutSpec, PlacementFailure, plan_grid_layout, plan_random_layout
from .prompts import render_prompt
from .seeds import derive_seed

DEFAULT_CATEGORIES = (
    "koala", "panda", "rabbit", "crocodile", "sea lion", "owl", "elephant",
    "raccoon", "kangaroo", "sloth", "bear", "duck", "turtle", "seal", "dog",
    "cat", "horse", "bird", "fox", "hedgehog", "otter", "penguin", "lemur",
    "walrus",
)


def resize_nearest(layer: np.ndarray, w: int, h: int) -> np.ndarray:
    """Nearest-neighbor resize; keeps alpha edges hard so pasted objects
    never bleed outside their boxes."""
    src_h, src_w = layer.shape[:2]
    rows = np.minimum(((np.arange(h) + 0.5) * src_h / h).astype(np.int64), src_h - 1)
    cols = np.minimum(((np.arange(w) + 0.5) * src_w / w).astype(np.int64), src_w - 1)
    return layer[rows[:, None], cols[None, :]]


def composite_scene(layout: LayoutSpec, layer: np.ndarray, background_gray: int = 200) -> np.ndarray:
    """Alpha-composite the layer into every layout box over a uniform gray
    canvas.  Returns an opaque RGB uint8 image; pixels outside all boxes are
    exactly ``background_gray``."""
    if layer.ndim != 3 or layer.shape[2] != 4:
        raise ValueError("layer must be an RGBA array of shape (h, w, 4)")
    if not 0 <= background_gray <= 255:
        raise ValueError("background_gray must be an 8-bit value")
    img = np.full((layout.canvas_h, layout.canvas_w, 3), background_gray, dtype=np.uint8)
    cache: dict[tuple[int, int], np.ndarray] = {}
    for box in layout.boxes:
        tile = cache.get((box.w, box.h))
        if tile is None:
            tile = resize_nearest(layer, box.w, box.h)
            cache[(box.w, box.h)] = tile
        a = tile[..., 3:4].astype(np.uint16)
        fg = tile[..., :3].astype(np.uint16)
        region = img[box.y:box.y + box.h, box.x:box.x + box.w].astype(np.uint16)
        blended = (fg * a + region * (255 - a) + 127) // 255
        img[box.y:box.y + box.h, box.x:box.x + box.w] = blended.astype(np.uint8)
    return img


def load_layer_png(path: str | Path) -> np.ndarray:
    """Import an external RGBA PNG object layer."""
    with Image.open(path) as im:
        if im.mode != "RGBA":
            raise ValueError(f"{path}: layer must be RGBA, got mode {im.mode}")
        return np.asarray(im, dtype=np.uint8).copy()


@dataclass
class DatasetConfig:
    out_dir: Path
    categories: tuple[str, ...] = DEFAULT_CATEGORIES[:10]
    count_min: int = 1
    count_max: int = 50
    samples_per: int = 2
    layout_type: str = "random"  # or "grid"
    canvas_w: int = 512
    canvas_h: int = 512
    fill_fraction: float = 0.25
    max_attempts: int = 1000
    grid_rows: int = 7
    grid_cols: int = 7
    background_gray: int = 200
    count_style: str = "numeral"
    master_seed: int = 0
    variable_size: bool = False
    layer_dir: Path | None = None
    write_layout_sidecars: bool = False
    jobs: int = 1
    styles: tuple[str, ...] = DEFAULT_STYLE_CYCLE

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if self.layer_dir is not None:
            self.layer_dir = Path(self.layer_dir)
        if self.count_min < 0 or self.count_max < self.count_min:
            raise ValueError("invalid count range")
        if self.layout_type not in ("random", "grid"):
            raise ValueError(f"layout_type must be random or grid, got {self.layout_type!r}")
        if self.layout_type == "grid" and self.count_max > self.grid_rows * self.grid_cols:
            raise ValueError("count_max exceeds grid capacity")

    @property
    def counts(self) -> range:
        return range(self.count_min, self.count_max + 1)

    @property
    def n_records(self) -> int:
        return len(self.categories) * len(self.counts) * self.samples_per


def _slug(category: str) -> str:
    return category.replace(" ", "-")


def _record_spec(config: DatasetConfig, record_id: int) -> tuple[int, int, int]:
    """Map a flat record index to (category index, count, sample index)."""
    per_cat = len(config.counts) * config.samples_per
    cat_idx, rest = divmod(record_id, per_cat)
    count_idx, sample_idx = divmod(rest, config.samples_per)
    return cat_idx, config.count_min + count_idx, sample_idx


def build_record(config: DatasetConfig, record_id: int) -> dict:
    """Render one record's PNG and return its manifest entry."""
    cat_idx, count, _ = _record_spec(config, record_id)
    category = config.categories[cat_idx]
    image_seed = derive_seed(config.master_seed, record_id)
    if config.layout_type == "grid":
        layout = plan_grid_layout(count, config.canvas_w, config.canvas_h,
                                  config.grid_rows, config.grid_cols)
    else:
        try:
            layout = plan_random_layout(
                count, config.canvas_w, config.canvas_h, config.fill_fraction,
                config.max_attempts, seed=image_seed,
                variable_size=config.variable_size,
            )
        except PlacementFailure as exc:
            exc.record_id = record_id
            raise
    # objects in one scene share a single layer instance
    if config.layer_dir is not None:
        layer = load_layer_png(config.layer_dir / f"{_slug(category)}.png")
    else:
        side = layout.boxes[0].w if layout.boxes else 32
        layer = synthesize_layer(cat_idx, config.styles[cat_idx % len(config.styles)], side)
    img = composite_scene(layout, layer, config.background_gray)
    rel_path = f"images/{record_id:06d}_{_slug(category)}_c{count:02d}.png"
    out_path = config.out_dir / rel_path
    Image.fromarray(img).save(out_path, format="PNG")
    if config.write_layout_sidecars:
        sidecar = out_path.with_suffix(".layout.json")
        sidecar.write_text(json.dumps(layout.to_dict(), sort_keys=True), encoding="utf-8")
    template_id = record_id % 10
    return {
        "record_id": record_id,
        "image_path": rel_path,
        "prompt": render_prompt(template_id, count, category, config.count_style),
        "count": count,
        "category": category,
        "template_id": template_id,
        "image_seed": image_seed,
        "background_gray": config.background_gray,
        "layout": layout.to_dict(),
    }


def generate_dataset(config: DatasetConfig) -> Path:
    """Write one PNG per record plus a JSONL manifest; returns the manifest
    path.  Counts are uniformly stratified over the count range per category.
    Output is byte-identical for a given config regardless of ``jobs``."""
    (config.out_dir / "images").mkdir(parents=True, exist_ok=True)
    ids = list(range(config.n_records))
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_build_record_job, [(config, i) for i in ids],
                                    chunksize=max(1, len(ids) // (config.jobs * 4))))
    else:
        records = [build_record(config, i) for i in ids]
    records.sort(key=lambda r: r["record_id"])
    manifest_path = config.out_dir / "manifest.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    return manifest_path


def _build_record_job(args: tuple[DatasetConfig, int]) -> dict:
    return build_record(*args)


def load_manifest(path: str | Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
