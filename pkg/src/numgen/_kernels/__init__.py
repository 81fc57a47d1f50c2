"""Kernel backend selection.

The Cython-compiled kernels are preferred when the extension built; setting
``NUMGEN_PURE=1`` in the environment forces the pure NumPy fallback.  Both
backends return bit-identical results (see benchmarks/bench_kernels.py for
the speed comparison).
"""

from __future__ import annotations

import os

import numpy as np

from . import pure

if os.environ.get("NUMGEN_PURE"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _ccl as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"


def label_components(mask: np.ndarray, connectivity: int = 8):
    """Label connected foreground regions of a 2-D binary mask.

    Returns ``(labels, count)``: int32 labels numbered 1..count in raster
    order of first appearance, 0 for background.
    """
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    return _impl.label_components(mask, connectivity)


def first_free(xs: np.ndarray, ys: np.ndarray, w: int, h: int, placed: np.ndarray) -> int:
    """First index i such that box (xs[i], ys[i], w, h) overlaps no placed
    box (open-interior semantics), or -1 if every candidate collides."""
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    placed = np.ascontiguousarray(placed, dtype=np.int64).reshape(-1, 4)
    return _impl.first_free(xs, ys, int(w), int(h), placed)
