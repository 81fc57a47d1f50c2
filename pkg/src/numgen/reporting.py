"""File emission for evaluation artifacts: count pairs, component reports,
metric tables, histograms, and figures.

All writers are deterministic: sorted JSON keys, fixed float formatting, no
timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .metrics import MetricsReport
from .oracle import ComponentReport


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_pairs_csv(path: str | Path, rows: Sequence[tuple[int, int, int]]) -> None:
    """rows: (record_id, requested, predicted)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["record_id", "requested", "predicted"])
        for rid, req, pred in rows:
            writer.writerow([rid, req, pred])


def read_pairs_csv(path: str | Path) -> list[tuple[int, int, int]]:
    """Returns (record_id, requested, predicted) rows; malformed rows are
    skipped and counted in the returned list's ``skipped`` attribute."""
    rows = []
    skipped = 0
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty pairs file")
        for raw in reader:
            try:
                rid, req, pred = int(raw[0]), int(raw[1]), int(raw[2])
            except (ValueError, IndexError):
                skipped += 1
                continue
            rows.append((rid, req, pred))
    out = _PairRows(rows)
    out.skipped = skipped
    return out


class _PairRows(list):
    skipped: int = 0


def write_components_jsonl(path: str | Path,
                           entries: Sequence[tuple[int, int, int, int, ComponentReport]]) -> None:
    """entries: (record_id, requested_count, image_w, image_h, report)."""
    with open(path, "w", encoding="utf-8") as f:
        for rid, req, w, h, report in entries:
            doc = {
                "record_id": rid,
                "requested": req,
                "predicted": report.count,
                "image_w": w,
                "image_h": h,
                "threshold_used": report.threshold_used,
                "components": [
                    {"x": b.x, "y": b.y, "w": b.w, "h": b.h, "area": area}
                    for b, area in report.components
                ],
            }
            f.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def read_components_jsonl(path: str | Path) -> list[dict]:
    docs = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                docs.append(json.loads(line))
    return docs


_METRICS_HEADER_NOTE = (
    "# buckets are half-open on the requested count; a bucket labelled "
    "lo-hi holds lo <= r < hi and the last bucket holds r >= its edge"
)


def write_metrics_csv(path: str | Path, report: MetricsReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(_METRICS_HEADER_NOTE + f"; tolerance T={report.tolerance}\n")
        writer = csv.writer(f)
        writer.writerow(["bucket", "n", "exact_accuracy", "tolerance_accuracy", "mae"])
        for row in report.rows():
            writer.writerow([row.label, row.n, _fmt(row.exact_accuracy),
                             _fmt(row.tolerance_accuracy), _fmt(row.mae)])


def metrics_report_dict(report: MetricsReport) -> dict:
    return {
        "bucket_semantics": "half-open [lo, hi) on requested count; final bucket unbounded",
        "tolerance": report.tolerance,
        "edges": list(report.edges),
        "flagged_below_range": report.flagged_below_range,
        "rows": [
            {"bucket": r.label, "n": r.n, "exact_accuracy": r.exact_accuracy,
             "tolerance_accuracy": r.tolerance_accuracy, "mae": r.mae}
            for r in report.rows()
        ],
    }


def write_metrics_json(path: str | Path, report: MetricsReport) -> None:
    Path(path).write_text(
        json.dumps(metrics_report_dict(report), sort_keys=True, indent=2) + "\n",
        encoding="utf-8")


def write_histogram_csv(path: str | Path, rows: Sequence[tuple[int, Sequence[int]]],
                        n_bins: int) -> None:
    """Per-seed predicted-count histograms; last bin collects overflow."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["seed"] + [f"count_{i}" for i in range(n_bins)] + ["overflow"])
        for seed, hist in rows:
            writer.writerow([seed] + list(hist))


def write_modes_csv(path: str | Path, rows: Sequence[tuple[int, int, float]]) -> None:
    """rows: (seed, mode, concentration)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["seed", "mode", "concentration"])
        for seed, mode, conc in rows:
            writer.writerow([seed, mode, _fmt(conc)])


def write_stability_csv(path: str | Path, table: dict[float, list], ns: Sequence[int]) -> None:
    """Rows are thresholds, columns the count transitions (n -> n+1)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["tau"] + [f"n={n}" for n in ns])
        for tau in sorted(table):
            by_n = {rec.n: rec for rec in table[tau]}
            writer.writerow([_fmt(tau)] +
                            [(_fmt(by_n[n].matched_fraction) if n in by_n else "") for n in ns])
