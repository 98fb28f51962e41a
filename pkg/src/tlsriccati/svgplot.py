"""Minimal deterministic SVG line plots.

Output depends only on the data and options, so identical inputs give
byte-identical documents.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .propagator import TimeSeries
from .spectrum import SpectrumSeries

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=30, bottom=50)

_YLABELS = {"inversion": "w", "dipole": "d", "emitted_field": "emitted field (arb. units)"}


def _coords(data):
    if isinstance(data, TimeSeries):
        return data.tau / (2 * np.pi), data.value, "tau / 2pi (cycles)", _YLABELS[data.kind]
    if isinstance(data, SpectrumSeries):
        return data.z, data.intensity, "z (harmonic order)", "intensity (arb. units)"
    x, y = data
    return np.asarray(x, float), np.asarray(y, float), "x", "y"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def emit_plot(data, log_y: bool = False, title: str | None = None,
              xlabel: str | None = None, ylabel: str | None = None) -> str:
    """Standalone SVG line plot of a series, a spectrum or an (x, y) pair."""
    x, y, default_xl, default_yl = _coords(data)
    if len(x) == 0:
        raise ValueError("nothing to plot")
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    xlabel = xlabel or default_xl
    ylabel = ylabel or default_yl
    y = np.asarray(y, dtype=float)
    if log_y:
        pos = y[y > 0]
        floor = pos.min() if pos.size else 1e-300
        y = np.log10(np.maximum(y, floor))
        ylabel = f"log10 {ylabel}"

    x0, x1 = float(np.min(x)), float(np.max(x))
    y0, y1 = float(np.min(y)), float(np.max(y))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (y1 - v) / (y1 - y0) * ph

    pts = [f"{_fmt(px(a))} {_fmt(py(b))}" for a, b in zip(x, y)]
    path = "M " + pts[0] + "".join(" L " + p for p in pts[1:])

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(px(t))}" y="{HEIGHT - MARGIN["bottom"] + 18}" '
                   f'font-size="11" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{_fmt(py(t) + 4)}" '
                   f'font-size="11" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:g}" y="{HEIGHT - 10}" font-size="13" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2:g}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2:g})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:g}" y="20" font-size="14" text-anchor="middle">'
                   f'{escape(title)}</text>')
    out.append(f'<path class="data" d="{path}" fill="none" stroke="#1f4e9a" stroke-width="1"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
