"""Dependency-free, byte-deterministic SVG histogram emitter.

Fixed 640x360 canvas, all coordinates rounded to 3 decimals, so equal
inputs always produce identical bytes and outputs are diffable.
"""
from __future__ import annotations

import numpy as np

__all__ = ["emit_svg_histogram", "svg_histogram_string"]

WIDTH, HEIGHT = 640, 360
MARGIN_LEFT, MARGIN_RIGHT = 50, 15
MARGIN_TOP, MARGIN_BOTTOM = 15, 35
BAR_FILL = "#4878cf"


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def svg_histogram_string(values, bins: int, title: str = "") -> str:
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    vals = np.asarray(list(values), dtype=float)

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    x0, y0 = MARGIN_LEFT, MARGIN_TOP

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        lines.append(
            f'<text x="{_fmt(WIDTH / 2)}" y="{_fmt(12.0)}" font-size="12" '
            f'text-anchor="middle" font-family="monospace">{title}</text>'
        )

    if vals.size:
        lo, hi = float(vals.min()), float(vals.max())
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
        peak = int(counts.max())
        bar_w = plot_w / bins
        for i, count in enumerate(counts):
            if count == 0:
                continue
            h = plot_h * count / peak
            lines.append(
                f'<rect x="{_fmt(x0 + i * bar_w)}" y="{_fmt(y0 + plot_h - h)}" '
                f'width="{_fmt(bar_w)}" height="{_fmt(h)}" fill="{BAR_FILL}"/>'
            )
        for frac, edge in ((0.0, edges[0]), (0.5, (edges[0] + edges[-1]) / 2), (1.0, edges[-1])):
            lines.append(
                f'<text x="{_fmt(x0 + frac * plot_w)}" y="{_fmt(HEIGHT - 12.0)}" '
                f'font-size="11" text-anchor="middle" font-family="monospace">{_fmt(edge)}</text>'
            )
        lines.append(
            f'<text x="{_fmt(12.0)}" y="{_fmt(y0 + 10.0)}" font-size="11" '
            f'text-anchor="start" font-family="monospace">{peak}</text>'
        )

    # axes drawn last so they sit on top of the bars
    lines.append(
        f'<line x1="{_fmt(x0)}" y1="{_fmt(y0 + plot_h)}" x2="{_fmt(x0 + plot_w)}" '
        f'y2="{_fmt(y0 + plot_h)}" stroke="black" stroke-width="1"/>'
    )
    lines.append(
        f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x0)}" '
        f'y2="{_fmt(y0 + plot_h)}" stroke="black" stroke-width="1"/>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_svg_histogram(values, bins: int, path, title: str = "") -> None:
    content = svg_histogram_string(values, bins, title)
    with open(path, "w", newline="\n") as fh:
        fh.write(content)
