"""Spatial-pattern analytics over object centers.

Seeded k-means++ clustering of object centers grouped by actual count,
optimal matching of cluster centers between consecutive counts, stability
scoring, and per-noise-seed count-mode concentration.  Centers are expected
in normalized [0,1]^2 canvas coordinates so the stability thresholds
(0.05..0.20) have a consistent scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .seeds import derive_seed

log = logging.getLogger(__name__)

DEFAULT_TAUS = (0.05, 0.10, 0.15, 0.20)


@dataclass
class ClusterResult:
    k: int
    centers: np.ndarray  # (k, 2)
    inertia: float
    iterations: int


@dataclass
class MatchResult:
    assignment: list[int]  # assignment[i] = index in B matched to A[i]
    total_cost: float
    new_indices: list[int]  # B entries with no A partner ("newly emerged")


@dataclass
class StabilityRecord:
    n: int
    tau: float
    matched_fraction: float
    new_centers: list[tuple[float, float]]


def _kmeans_once(points: np.ndarray, k: int, rng: np.random.Generator,
                 max_iter: int, tol: float) -> ClusterResult:
    n = points.shape[0]
    # k-means++ seeding
    centers = np.empty((k, 2), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = points[idx]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))

    inertia = np.inf
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dists.argmin(axis=1)
        inertia = float(dists[np.arange(n), labels].sum())
        new_centers = centers.copy()
        for j in range(k):
            member = labels == j
            if member.any():
                new_centers[j] = points[member].mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its center
                farthest = int(dists[np.arange(n), labels].argmax())
                new_centers[j] = points[farthest]
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if shift < tol:
            break
    dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    inertia = float(dists.min(axis=1).sum())
    return ClusterResult(k, centers, inertia, iterations)


def kmeans(points: Sequence[tuple[float, float]] | np.ndarray, k: int, seed: int = 0,
           max_iter: int = 100, tol: float = 1e-6, restarts: int = 1) -> ClusterResult:
    """Seeded k-means++ plus Lloyd iterations; stops when the largest center
    movement falls below tol.  With several restarts the lowest-inertia run
    wins (first run on ties)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if k < 1:
        raise ValueError("k must be >= 1")
    if pts.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {pts.shape[0]}")
    best: ClusterResult | None = None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng(derive_seed(seed, r))
        result = _kmeans_once(pts, k, rng, max_iter, tol)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def _solve_assignment(cost: np.ndarray) -> list[int]:
    """Optimal assignment of m rows to n >= m columns minimizing total cost
    (shortest augmenting path with potentials)."""
    m, n = cost.shape
    INF = float("inf")
    u = [0.0] * (m + 1)
    v = [0.0] * (n + 1)
    match = [0] * (n + 1)  # match[j] = row assigned to column j (1-based)
    way = [0] * (n + 1)
    for i in range(1, m + 1):
        match[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    assignment = [-1] * m
    for j in range(1, n + 1):
        if match[j] > 0:
            assignment[match[j] - 1] = j - 1
    return assignment


def hungarian_match(a: np.ndarray | Sequence, b: np.ndarray | Sequence) -> MatchResult:
    """Injective assignment of the m centers in ``a`` onto the n >= m
    centers in ``b`` minimizing the total Euclidean (non-squared) distance;
    unmatched ``b`` entries are reported as newly emerged."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    m, n = a.shape[0], b.shape[0]
    if m > n:
        raise ValueError(f"need |A| <= |B|, got {m} > {n}")
    if m == 0:
        return MatchResult([], 0.0, list(range(n)))
    cost = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    assignment = _solve_assignment(cost)
    total = float(sum(cost[i, j] for i, j in enumerate(assignment)))
    matched = set(assignment)
    new_indices = [j for j in range(n) if j not in matched]
    return MatchResult(assignment, total, new_indices)


def stability_score(centers_n: np.ndarray, centers_n1: np.ndarray, tau: float) -> StabilityRecord:
    """Fraction of the n centers whose optimal partner among the n+1 centers
    lies strictly closer than tau; the unmatched partner is the new center."""
    a = np.asarray(centers_n, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(centers_n1, dtype=np.float64).reshape(-1, 2)
    n = a.shape[0]
    if b.shape[0] != n + 1:
        raise ValueError(f"expected {n + 1} centers at the next count, got {b.shape[0]}")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    result = hungarian_match(a, b)
    dists = np.sqrt(((a - b[result.assignment]) ** 2).sum(axis=1))
    fraction = float((dists < tau).sum() / n) if n else 1.0
    new_centers = [(float(b[j, 0]), float(b[j, 1])) for j in result.new_indices]
    return StabilityRecord(n, tau, fraction, new_centers)


def mode_preference(counts: Sequence[int]) -> tuple[int, float]:
    """Most frequent count (smallest on ties) and the fraction of samples
    within +-1 of it."""
    if len(counts) == 0:
        raise ValueError("counts must be non-empty")
    values, freqs = np.unique(np.asarray(counts, dtype=np.int64), return_counts=True)
    mode = int(values[freqs.argmax()])  # np.unique sorts, argmax takes first max
    concentration = float(np.mean(np.abs(np.asarray(counts) - mode) <= 1))
    return mode, concentration


def cluster_groups(groups: Mapping[int, np.ndarray], seed: int = 0,
                   restarts: int = 1) -> dict[int, ClusterResult]:
    """k-means with k = n over each group of centers keyed by actual count."""
    out = {}
    for n in sorted(groups):
        pts = np.asarray(groups[n], dtype=np.float64).reshape(-1, 2)
        if pts.shape[0] < n or n < 1:
            log.warning("skipping count %d: %d points < k", n, pts.shape[0])
            continue
        out[n] = kmeans(pts, n, seed=derive_seed(seed, n), restarts=restarts)
    return out


def evolution_trace(groups: Mapping[int, np.ndarray], tau: float, seed: int = 0,
                    restarts: int = 1) -> list[StabilityRecord]:
    """Stability records for every consecutive (n, n+1) pair present in the
    grouped center sets; gaps in the count sequence are skipped with a
    warning."""
    clustered = cluster_groups(groups, seed=seed, restarts=restarts)
    records = []
    for n in sorted(clustered):
        if n + 1 not in clustered:
            if n != max(clustered):
                log.warning("count sequence gap after n=%d; pair skipped", n)
            continue
        records.append(stability_score(clustered[n].centers, clustered[n + 1].centers, tau))
    return records


def stability_table(groups: Mapping[int, np.ndarray], taus: Sequence[float] = DEFAULT_TAUS,
                    seed: int = 0, restarts: int = 1) -> dict[float, list[StabilityRecord]]:
    """Stability records over a tau grid, clustering each group only once."""
    clustered = cluster_groups(groups, seed=seed, restarts=restarts)
    table: dict[float, list[StabilityRecord]] = {}
    for tau in taus:
        records = []
        for n in sorted(clustered):
            if n + 1 in clustered:
                records.append(stability_score(clustered[n].centers, clustered[n + 1].centers, tau))
        table[tau] = records
    return table
