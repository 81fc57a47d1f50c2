"""Pure NumPy fallback kernels.

Run-length based connected-component labeling and a broadcast non-overlap
test.  Outputs are bit-identical to the compiled twins in ``_ccl``: labels
are numbered 1..count in order of first appearance in a row-major scan.
"""

from __future__ import annotations

import numpy as np


def _find(parent: np.ndarray, x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def label_components(mask: np.ndarray, connectivity: int):
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)

    # run-length encode every row
    b = np.zeros((h, w + 2), dtype=np.int8)
    b[:, 1:-1] = mask != 0
    d = np.diff(b, axis=1)
    run_r, starts = np.nonzero(d == 1)
    _, ends = np.nonzero(d == -1)  # exclusive end columns, paired in order
    n_runs = run_r.shape[0]
    if n_runs == 0:
        return labels, 0

    parent = np.arange(n_runs, dtype=np.int64)
    # index ranges of the runs belonging to each row
    row_lo = np.searchsorted(run_r, np.arange(h))
    row_hi = np.searchsorted(run_r, np.arange(h), side="right")
    g = 1 if connectivity == 8 else 0

    for r in range(1, h):
        i0, i1 = row_lo[r], row_hi[r]
        p0, p1 = row_lo[r - 1], row_hi[r - 1]
        if i0 == i1 or p0 == p1:
            continue
        p = p0
        for i in range(i0, i1):
            while p < p1 and ends[p] + g <= starts[i]:
                p += 1
            q = p
            while q < p1 and starts[q] < ends[i] + g:
                ra, rb = _find(parent, i), _find(parent, q)
                if ra != rb:
                    if ra < rb:
                        parent[rb] = ra
                    else:
                        parent[ra] = rb
                q += 1

    # canonical component ids in raster order of each component's first run
    canon: dict[int, int] = {}
    n_final = 0
    final = np.zeros(n_runs, dtype=np.int32)
    for i in range(n_runs):
        root = _find(parent, i)
        lbl = canon.get(root)
        if lbl is None:
            n_final += 1
            canon[root] = lbl = n_final
        final[i] = lbl
    for i in range(n_runs):
        labels[run_r[i], starts[i]:ends[i]] = final[i]
    return labels, n_final


def first_free(xs: np.ndarray, ys: np.ndarray, w: int, h: int, placed: np.ndarray) -> int:
    if xs.shape[0] == 0:
        return -1
    if placed.shape[0] == 0:
        return 0
    px, py = placed[:, 0], placed[:, 1]
    pw, ph = placed[:, 2], placed[:, 3]
    ox = (xs[:, None] < px + pw) & (px < xs[:, None] + w)
    oy = (ys[:, None] < py + ph) & (py < ys[:, None] + h)
    free = np.flatnonzero(~(ox & oy).any(axis=1))
    return int(free[0]) if free.size else -1
