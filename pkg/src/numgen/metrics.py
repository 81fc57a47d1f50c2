"""Counting metrics over (requested, predicted) pairs.

Exact accuracy, mean absolute error, and tolerance accuracy (|p - r| <= T,
default T = 2), plus per-range bucketing.  Buckets are half-open on the
requested count: "1-10" means 1 <= r < 10 and the final bucket is r >= 30,
which resolves the overlapping range labels unambiguously.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

DEFAULT_TOLERANCE = 2
DEFAULT_EDGES = (1, 10, 20, 30)

Pair = tuple[int, int]  # (requested, predicted)


def _require_pairs(pairs: Sequence[Pair]) -> None:
    if len(pairs) == 0:
        raise ValueError("metrics need at least one pair")


def exact_accuracy(pairs: Sequence[Pair]) -> float:
    _require_pairs(pairs)
    hits = sum(1 for r, p in pairs if p == r)
    return hits / len(pairs)


def mean_absolute_error(pairs: Sequence[Pair]) -> float:
    _require_pairs(pairs)
    total = 0.0
    for r, p in pairs:
        total += abs(p - r)
    return total / len(pairs)


def tolerance_accuracy(pairs: Sequence[Pair], t: int = DEFAULT_TOLERANCE) -> float:
    _require_pairs(pairs)
    if t < 0:
        raise ValueError("tolerance must be >= 0")
    hits = sum(1 for r, p in pairs if abs(p - r) <= t)
    return hits / len(pairs)


@dataclass
class BucketMetrics:
    label: str
    n: int
    exact_accuracy: float
    tolerance_accuracy: float
    mae: float


@dataclass
class MetricsReport:
    buckets: list[BucketMetrics]
    overall: BucketMetrics
    edges: tuple[int, ...]
    tolerance: int
    flagged_below_range: int = 0

    def rows(self) -> list[BucketMetrics]:
        return self.buckets + [self.overall]


def bucket_labels(edges: Sequence[int]) -> list[str]:
    labels = [f"{edges[i]}-{edges[i + 1]}" for i in range(len(edges) - 1)]
    labels.append(f">{edges[-1]}")
    return labels


def bucket_report(
    pairs: Sequence[Pair],
    edges: Sequence[int] = DEFAULT_EDGES,
    t: int = DEFAULT_TOLERANCE,
) -> MetricsReport:
    """Per-bucket and overall metrics.  Pairs with a requested count below
    the first edge go to the first bucket and are flagged; empty buckets are
    omitted rather than reported as 0/0."""
    _require_pairs(pairs)
    if any(edges[i] >= edges[i + 1] for i in range(len(edges) - 1)):
        raise ValueError("bucket edges must be strictly increasing")
    labels = bucket_labels(edges)
    grouped: list[list[Pair]] = [[] for _ in labels]
    flagged = 0
    for r, p in pairs:
        if r < edges[0]:
            grouped[0].append((r, p))
            flagged += 1
            continue
        for i in range(len(edges) - 1):
            if edges[i] <= r < edges[i + 1]:
                grouped[i].append((r, p))
                break
        else:
            grouped[-1].append((r, p))
    buckets = [
        BucketMetrics(label, len(group), exact_accuracy(group),
                      tolerance_accuracy(group, t), mean_absolute_error(group))
        for label, group in zip(labels, grouped)
        if group
    ]
    overall = BucketMetrics("overall", len(pairs), exact_accuracy(pairs),
                            tolerance_accuracy(pairs, t), mean_absolute_error(pairs))
    return MetricsReport(buckets, overall, tuple(edges), t, flagged)
