"""Minimal static SVG line/scatter charts, no plotting stack.

These are diagnostics, not publication graphics: linear or log10 axes, a few
series per panel, simple tick labels. Rendering is a pure function of the
numeric data, so disabling SVG output can never change numeric results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    xs: list
    ys: list
    label: str = ""
    color: str | None = None
    points: bool = False  # scatter instead of polyline


@dataclass
class Panel:
    title: str
    series: list = field(default_factory=list)
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False

    def add(self, xs, ys, label="", points=False) -> "Panel":
        self.series.append(Series(list(map(float, xs)), list(map(float, ys)),
                                  label, points=points))
        return self


def _finite_pairs(series: Series, logy: bool):
    out = []
    for x, y in zip(series.xs, series.ys):
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        if logy:
            if y <= 0:
                continue
            y = math.log10(y)
        out.append((x, y))
    return out


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * span:
        ticks.append(round(v, 12))
        v += step
    return ticks


def render_panels(panels: list, width: int = 360, height: int = 300) -> str:
    """Side-by-side panels as one SVG document string."""
    total_w = width * len(panels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" '
        f'height="{height}" viewBox="0 0 {total_w} {height}">',
        f'<rect width="{total_w}" height="{height}" fill="white"/>',
    ]
    for i, panel in enumerate(panels):
        parts.append(_render_one(panel, i * width, width, height))
    parts.append("</svg>\n")
    return "\n".join(parts)


def _render_one(panel: Panel, x0: int, width: int, height: int) -> str:
    ml, mr, mt, mb = 52, 12, 28, 40
    plot_w, plot_h = width - ml - mr, height - mt - mb
    data = [_finite_pairs(s, panel.logy) for s in panel.series]
    pts = [p for d in data for p in d]
    if not pts:
        return f'<text x="{x0 + width/2}" y="{height/2}">no data</text>'
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.04 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def sx(v):
        return x0 + ml + (v - xlo) / (xhi - xlo) * plot_w

    def sy(v):
        return mt + plot_h - (v - ylo) / (yhi - ylo) * plot_h

    out = [f'<rect x="{x0 + ml}" y="{mt}" width="{plot_w}" height="{plot_h}" '
           'fill="none" stroke="#444"/>']
    out.append(f'<text x="{x0 + width/2:.1f}" y="16" text-anchor="middle" '
               f'font-size="13" font-family="sans-serif">{panel.title}</text>')
    for tv in _ticks(xlo, xhi):
        px = sx(tv)
        out.append(f'<line x1="{px:.1f}" y1="{mt + plot_h}" x2="{px:.1f}" '
                   f'y2="{mt + plot_h + 4}" stroke="#444"/>')
        out.append(f'<text x="{px:.1f}" y="{mt + plot_h + 16}" text-anchor="middle" '
                   f'font-size="9" font-family="sans-serif">{tv:g}</text>')
    for tv in _ticks(ylo, yhi):
        py = sy(tv)
        lab = f"1e{tv:g}" if panel.logy else f"{tv:g}"
        out.append(f'<line x1="{x0 + ml - 4}" y1="{py:.1f}" x2="{x0 + ml}" '
                   f'y2="{py:.1f}" stroke="#444"/>')
        out.append(f'<text x="{x0 + ml - 6}" y="{py + 3:.1f}" text-anchor="end" '
                   f'font-size="9" font-family="sans-serif">{lab}</text>')
    if panel.xlabel:
        out.append(f'<text x="{x0 + ml + plot_w/2:.1f}" y="{height - 6}" '
                   f'text-anchor="middle" font-size="11" font-family="sans-serif">'
                   f'{panel.xlabel}</text>')
    if panel.ylabel:
        cy = mt + plot_h / 2
        out.append(f'<text x="{x0 + 14}" y="{cy:.1f}" text-anchor="middle" '
                   f'font-size="11" font-family="sans-serif" '
                   f'transform="rotate(-90 {x0 + 14} {cy:.1f})">{panel.ylabel}</text>')
    for k, (s, d) in enumerate(zip(panel.series, data)):
        color = s.color or PALETTE[k % len(PALETTE)]
        if s.points:
            for px, py in d:
                out.append(f'<circle cx="{sx(px):.2f}" cy="{sy(py):.2f}" r="2" '
                           f'fill="{color}"/>')
        elif d:
            path = " ".join(f"{sx(px):.2f},{sy(py):.2f}" for px, py in d)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                       'stroke-width="1.2"/>')
        if s.label:
            ly = mt + 14 + 13 * k
            out.append(f'<line x1="{x0 + ml + 6}" y1="{ly - 3}" x2="{x0 + ml + 22}" '
                       f'y2="{ly - 3}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{x0 + ml + 26}" y="{ly}" font-size="10" '
                       f'font-family="sans-serif">{s.label}</text>')
    return "\n".join(out)


def write_svg(path, panels: list, width: int = 360, height: int = 300) -> None:
    Path(path).write_text(render_panels(panels, width, height), encoding="utf-8")
