"""Minimal deterministic SVG emission for scatter and bar charts."""

from __future__ import annotations

from typing import Sequence

_SIZE = 480
_MARGIN = 48


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
        f'<text x="{_SIZE // 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]


def scatter_svg(points: Sequence[tuple[float, float]], title: str,
                x_label: str = "requested", y_label: str = "predicted",
                diagonal: bool = True) -> str:
    """Scatter plot with an optional y=x reference line; axis range covers
    both coordinates."""
    lo = 0.0
    hi = max([x for x, _ in points] + [y for _, y in points] + [1.0]) * 1.05
    span = _SIZE - 2 * _MARGIN

    def sx(v: float) -> float:
        return _MARGIN + (v - lo) / (hi - lo) * span

    def sy(v: float) -> float:
        return _SIZE - _MARGIN - (v - lo) / (hi - lo) * span

    parts = _header(title)
    parts.append(f'<line x1="{_MARGIN}" y1="{_SIZE - _MARGIN}" x2="{_SIZE - _MARGIN}" '
                 f'y2="{_SIZE - _MARGIN}" stroke="black"/>')
    parts.append(f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
                 f'y2="{_SIZE - _MARGIN}" stroke="black"/>')
    if diagonal:
        parts.append(f'<line x1="{sx(lo):.2f}" y1="{sy(lo):.2f}" x2="{sx(hi):.2f}" '
                     f'y2="{sy(hi):.2f}" stroke="#888" stroke-dasharray="4 3"/>')
    for x, y in points:
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     f'fill="#1f6fb2" fill-opacity="0.55"/>')
    parts.append(f'<text x="{_SIZE // 2}" y="{_SIZE - 12}" text-anchor="middle" '
                 f'font-size="12" font-family="sans-serif">{x_label}</text>')
    parts.append(f'<text x="14" y="{_SIZE // 2}" text-anchor="middle" font-size="12" '
                 f'font-family="sans-serif" transform="rotate(-90 14 {_SIZE // 2})">{y_label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_svg(labels: Sequence[str], values: Sequence[float], title: str) -> str:
    if len(labels) != len(values):
        raise ValueError("labels and values must align")
    vmax = max(list(values) + [1e-9])
    span = _SIZE - 2 * _MARGIN
    n = len(values)
    bar_w = span / max(n, 1) * 0.8
    parts = _header(title)
    parts.append(f'<line x1="{_MARGIN}" y1="{_SIZE - _MARGIN}" x2="{_SIZE - _MARGIN}" '
                 f'y2="{_SIZE - _MARGIN}" stroke="black"/>')
    for i, (label, v) in enumerate(zip(labels, values)):
        x = _MARGIN + span * (i + 0.1) / max(n, 1)
        h = span * (v / vmax)
        y = _SIZE - _MARGIN - h
        parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" height="{h:.2f}" '
                     f'fill="#1f6fb2"/>')
        parts.append(f'<text x="{x + bar_w / 2:.2f}" y="{_SIZE - _MARGIN + 14}" '
                     f'text-anchor="middle" font-size="9" font-family="sans-serif">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
