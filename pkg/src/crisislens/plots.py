"""Minimal deterministic SVG line plots.

Hand-rolled on purpose: the output must be byte-identical across runs with
the same inputs, which rules out plotting libraries that embed timestamps
or session-unique element ids.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 50, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def svg_line_plot(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    path: str | Path,
) -> None:
    """Write one SVG with a polyline per (label, xs, ys) series.

    Points whose y is None are skipped (breaks in the line).
    """
    xs_all = [x for _, xs, ys in series for x, y in zip(xs, ys) if y is not None]
    ys_all = [y for _, xs, ys in series for y in ys if y is not None]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_min, x_max = min(xs_all), max(xs_all)
    y_min, y_max = min(ys_all), max(ys_all)
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    pad_y = 0.05 * (y_max - y_min)
    y_min -= pad_y
    y_max += pad_y
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}"'
        f' viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" font-size="16"'
        f' font-family="sans-serif">{title}</text>',
        # axes
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}"'
        f' y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}"'
        f' y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<text x="{MARGIN_L + plot_w // 2}" y="{HEIGHT - 15}" text-anchor="middle"'
        f' font-size="13" font-family="sans-serif">{xlabel}</text>',
        f'<text x="18" y="{MARGIN_T + plot_h // 2}" text-anchor="middle" font-size="13"'
        f' font-family="sans-serif" transform="rotate(-90 18 {MARGIN_T + plot_h // 2})">{ylabel}</text>',
    ]
    n_ticks = 5
    for i in range(n_ticks):
        fx = x_min + (x_max - x_min) * i / (n_ticks - 1)
        fy = y_min + (y_max - y_min) * i / (n_ticks - 1)
        tx, ty = px(fx), py(fy)
        lines.append(
            f'<line x1="{tx:.1f}" y1="{HEIGHT - MARGIN_B}" x2="{tx:.1f}"'
            f' y2="{HEIGHT - MARGIN_B + 5}" stroke="black"/>'
        )
        lines.append(
            f'<text x="{tx:.1f}" y="{HEIGHT - MARGIN_B + 20}" text-anchor="middle"'
            f' font-size="11" font-family="sans-serif">{_fmt(fx)}</text>'
        )
        lines.append(
            f'<line x1="{MARGIN_L - 5}" y1="{ty:.1f}" x2="{MARGIN_L}" y2="{ty:.1f}" stroke="black"/>'
        )
        lines.append(
            f'<text x="{MARGIN_L - 9}" y="{ty + 4:.1f}" text-anchor="end" font-size="11"'
            f' font-family="sans-serif">{_fmt(fy)}</text>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        segments: list[list[str]] = [[]]
        for x, y in zip(xs, ys):
            if y is None:
                if segments[-1]:
                    segments.append([])
                continue
            segments[-1].append(f"{px(x):.2f},{py(y):.2f}")
        for seg in segments:
            if len(seg) >= 2:
                lines.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" stroke="{color}" stroke-width="2"/>'
                )
            elif len(seg) == 1:
                cx, cy = seg[0].split(",")
                lines.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>')
        ly = MARGIN_T + 16 * idx
        lines.append(
            f'<line x1="{WIDTH - MARGIN_R - 110}" y1="{ly}" x2="{WIDTH - MARGIN_R - 90}"'
            f' y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        lines.append(
            f'<text x="{WIDTH - MARGIN_R - 85}" y="{ly + 4}" font-size="11"'
            f' font-family="sans-serif">{label}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
