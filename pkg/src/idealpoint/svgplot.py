"""Hand-rolled SVG plot of sweep summaries (no plotting dependency).

Renders mean-distance curves on log-log axes with shaded interquartile
bands.  Depth points are placed at x = m + 1 so the m = 0 baseline is
representable on the log axis and coincides with the breadth curve's k = 1
baseline; breadth points sit at x = k.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import ValidationError
from .harness import SweepSummary

_WIDTH, _HEIGHT = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 24, 28, 56
_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
_FLOOR = 1e-9


def _series_from_summaries(summaries: Sequence[SweepSummary]):
    """Group rows into plottable series: (label, dashed, [(x, mean, p25, p75)])."""
    depth = sorted((s for s in summaries if s.mode == "depth"), key=lambda s: s.m)
    breadth = sorted((s for s in summaries if s.mode == "breadth"), key=lambda s: s.k)
    joint = [s for s in summaries if s.mode == "joint"]
    series = []
    if depth:
        series.append(
            ("depth: vary m, k=1", False, [(s.m + 1, s.mean_distance, s.p25, s.p75) for s in depth])
        )
    if breadth:
        series.append(
            ("breadth: vary k, m=0", True, [(s.k, s.mean_distance, s.p25, s.p75) for s in breadth])
        )
    for k in sorted({s.k for s in joint}):
        rows = sorted((s for s in joint if s.k == k), key=lambda s: s.m)
        series.append(
            (f"joint: k={k}", False, [(s.m + 1, s.mean_distance, s.p25, s.p75) for s in rows])
        )
    return series


def _log(v: float) -> float:
    return math.log10(max(float(v), _FLOOR))


def _ticks(lo: float, hi: float):
    """Decade ticks covering [lo, hi] in log10 space, at least two."""
    first = math.floor(lo)
    last = math.ceil(hi)
    ticks = [10.0**e for e in range(first, last + 1) if lo - 1e-9 <= e <= hi + 1e-9]
    if len(ticks) < 2:
        ticks = [10.0**lo, 10.0**hi]
    return ticks


def emit_svg(summaries: Sequence[SweepSummary], path) -> None:
    """Write the summaries as a standalone SVG file."""
    series = _series_from_summaries(list(summaries))
    if not series or not any(pts for _, _, pts in series):
        raise ValidationError("nothing to plot: no sweep summaries")

    xs = [p[0] for _, _, pts in series for p in pts]
    ys = [v for _, _, pts in series for p in pts for v in p[1:]]
    x_lo, x_hi = _log(min(xs)), _log(max(xs))
    y_lo, y_hi = _log(min(ys)), _log(max(ys))
    if x_hi - x_lo < 1e-9:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    y_pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(v: float) -> float:
        return _MARGIN_L + (_log(v) - x_lo) / (x_hi - x_lo) * plot_w

    def py(v: float) -> float:
        return _MARGIN_T + (y_hi - _log(v)) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]

    for tick in _ticks(x_lo, x_hi):
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T}" x2="{x:.2f}" y2="{_MARGIN_T + plot_h}" '
            'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_T + plot_h + 18}" text-anchor="middle">{tick:g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        y = py(tick)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.2f}" x2="{_MARGIN_L + plot_w}" y2="{y:.2f}" '
            'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" text-anchor="end">{tick:g}</text>'
        )

    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_HEIGHT - 14}" text-anchor="middle">'
        "queries m + 1 (depth) / products k (breadth), log scale</text>"
    )
    parts.append(
        f'<text x="18" y="{_MARGIN_T + plot_h / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.2f})">distance to ideal point, log scale</text>'
    )

    for i, (label, dashed, pts) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        band = " ".join(f"{px(x):.2f},{py(hi):.2f}" for x, _, _, hi in pts)
        band += " " + " ".join(f"{px(x):.2f},{py(lo):.2f}" for x, _, lo, _ in reversed(pts))
        parts.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.18" stroke="none"/>')
        line = " ".join(f"{px(x):.2f},{py(mean):.2f}" for x, mean, _, _ in pts)
        dash = ' stroke-dasharray="5,4"' if dashed else ""
        parts.append(
            f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"{dash}/>'
        )
        for x, mean, _, _ in pts:
            parts.append(f'<circle cx="{px(x):.2f}" cy="{py(mean):.2f}" r="3" fill="{color}"/>')
        ly = _MARGIN_T + 16 + 18 * i
        lx = _MARGIN_L + plot_w - 200
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 26}" y2="{ly - 4}" stroke="{color}" '
            f'stroke-width="2"{dash}/>'
        )
        parts.append(f'<text x="{lx + 32}" y="{ly}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
