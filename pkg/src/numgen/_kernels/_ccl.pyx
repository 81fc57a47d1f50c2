# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: two-pass connected-component labeling and the
non-overlap test used by the layout rejection sampler.

Both kernels have pure NumPy twins in ``numgen._kernels.pure`` that must
produce bit-identical results; the package selects a backend at import time.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline int _find(int[::1] parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def label_components(const unsigned char[:, ::1] mask, int connectivity):
    """Label connected foreground regions of a binary mask.

    Returns ``(labels, count)`` where labels is int32, background is 0 and
    components are numbered 1..count in order of first appearance in a
    row-major scan.
    """
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    # one provisional label per isolated pixel at worst
    parent_arr = np.zeros(h * w // 2 + 2, dtype=np.int32)
    cdef int[::1] parent = parent_arr
    cdef int next_label = 1
    cdef Py_ssize_t r, c
    cdef int best, root, cand, k
    cdef int neigh[4]
    cdef int n_neigh
    cdef bint eight = connectivity == 8

    if connectivity != 4 and connectivity != 8:
        raise ValueError("connectivity must be 4 or 8")

    for r in range(h):
        for c in range(w):
            if mask[r, c] == 0:
                continue
            n_neigh = 0
            if c > 0 and labels[r, c - 1] > 0:
                neigh[n_neigh] = labels[r, c - 1]
                n_neigh += 1
            if r > 0:
                if labels[r - 1, c] > 0:
                    neigh[n_neigh] = labels[r - 1, c]
                    n_neigh += 1
                if eight:
                    if c > 0 and labels[r - 1, c - 1] > 0:
                        neigh[n_neigh] = labels[r - 1, c - 1]
                        n_neigh += 1
                    if c + 1 < w and labels[r - 1, c + 1] > 0:
                        neigh[n_neigh] = labels[r - 1, c + 1]
                        n_neigh += 1
            if n_neigh == 0:
                parent[next_label] = next_label
                labels[r, c] = next_label
                next_label += 1
            else:
                best = _find(parent, neigh[0])
                for k in range(1, n_neigh):
                    root = _find(parent, neigh[k])
                    if root < best:
                        parent[best] = root
                        best = root
                    elif root > best:
                        parent[root] = best
                labels[r, c] = best

    # second pass: canonical labels in order of first raster appearance
    canon_arr = np.zeros(next_label, dtype=np.int32)
    cdef int[::1] canon = canon_arr
    cdef int n_final = 0
    for r in range(h):
        for c in range(w):
            if labels[r, c] == 0:
                continue
            root = _find(parent, labels[r, c])
            if canon[root] == 0:
                n_final += 1
                canon[root] = n_final
            labels[r, c] = canon[root]
    return labels_arr, n_final


def first_free(const long long[::1] xs, const long long[::1] ys,
               long long w, long long h,
               const long long[:, ::1] placed):
    """Index of the first candidate box (xs[i], ys[i], w, h) whose open
    interior is disjoint from every placed box, or -1."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = placed.shape[0]
    cdef Py_ssize_t i, j
    cdef long long x, y
    cdef bint bad
    for i in range(n):
        x = xs[i]
        y = ys[i]
        bad = False
        for j in range(m):
            if (x < placed[j, 0] + placed[j, 2] and placed[j, 0] < x + w and
                    y < placed[j, 1] + placed[j, 3] and placed[j, 1] < y + h):
                bad = True
                break
        if not bad:
            return i
    return -1
