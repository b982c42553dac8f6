"""Minimal SVG 1.1 overlay of densities (polylines) and histograms (bars)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import ContractError

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=60, right=20, top=40, bottom=50)
LINE_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"]
BAR_COLORS = ["#7f7f7f", "#17becf", "#bcbd22", "#8c564b", "#e377c2"]


def _attr(text: str) -> str:
    return escape(text, {'"': "&quot;"})


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 6) -> np.ndarray:
    step = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(step))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= step), default=step)
    return np.arange(np.ceil(lo / step) * step, hi + 1e-9 * step, step)


def render_overlay(densities, histograms, title: str = "") -> str:
    """SVG text overlaying ``(name, SpectralDensity)`` curves and
    ``(name, Histogram)`` bars on common axes.

    The x range covers the union of density supports and histogram bins.
    """
    if not densities and not histograms:
        raise ContractError("nothing to plot")
    xs, ys = [], [0.0]
    for _, d in densities:
        xs += [d.support[0], d.support[1]]
        ys.append(float(d.values.max()))
    for _, h in histograms:
        xs += [h.bin_edges[0], h.bin_edges[-1]]
        ys.append(float(h.density.max()))
    x0, x1 = min(xs), max(xs)
    pad = 0.02 * (x1 - x0 or 1.0)
    x0, x1 = x0 - pad, x1 + pad
    y1 = 1.05 * max(ys) or 1.0

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    sx = lambda x: MARGIN["left"] + (x - x0) / (x1 - x0) * pw
    sy = lambda y: MARGIN["top"] + ph - y / y1 * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="16">{escape(title)}</text>')

    for k, (name, h) in enumerate(histograms):
        color = BAR_COLORS[k % len(BAR_COLORS)]
        out.append(f'<g class="histogram" fill="{color}" fill-opacity="0.5" '
                   f'data-name="{_attr(name)}">')
        for lo, hi, dens in zip(h.bin_edges[:-1], h.bin_edges[1:], h.density):
            if dens <= 0:
                continue
            top = sy(dens)
            out.append(f'<rect x="{_fmt(sx(lo))}" y="{_fmt(top)}" '
                       f'width="{_fmt(sx(hi) - sx(lo))}" height="{_fmt(sy(0) - top)}"/>')
        out.append("</g>")

    for k, (name, d) in enumerate(densities):
        color = LINE_COLORS[k % len(LINE_COLORS)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(d.grid, d.values))
        out.append(f'<polyline class="density" data-name="{_attr(name)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5" points="{pts}"/>')

    # axes
    bx, by = MARGIN["left"], MARGIN["top"] + ph
    out.append('<g class="axes" stroke="black" font-family="sans-serif" font-size="11">')
    out.append(f'<line x1="{bx}" y1="{by}" x2="{bx + pw}" y2="{by}"/>')
    out.append(f'<line x1="{bx}" y1="{MARGIN["top"]}" x2="{bx}" y2="{by}"/>')
    for t in _nice_ticks(x0, x1):
        X = _fmt(sx(t))
        out.append(f'<line x1="{X}" y1="{by}" x2="{X}" y2="{by + 5}"/>')
        out.append(f'<text x="{X}" y="{by + 18}" stroke="none" text-anchor="middle">{t:.6g}</text>')
    for t in _nice_ticks(0.0, y1, 5):
        Y = _fmt(sy(t))
        out.append(f'<line x1="{bx - 5}" y1="{Y}" x2="{bx}" y2="{Y}"/>')
        out.append(f'<text x="{bx - 8}" y="{Y}" stroke="none" text-anchor="end" '
                   f'dominant-baseline="middle">{t:.6g}</text>')
    out.append("</g>")

    # legend
    entries = [(n, LINE_COLORS[k % len(LINE_COLORS)]) for k, (n, _) in enumerate(densities)]
    entries += [(n, BAR_COLORS[k % len(BAR_COLORS)]) for k, (n, _) in enumerate(histograms)]
    out.append('<g class="legend" font-family="sans-serif" font-size="11">')
    for k, (name, color) in enumerate(entries):
        y = MARGIN["top"] + 10 + 16 * k
        out.append(f'<rect x="{WIDTH - 180}" y="{y - 8}" width="12" height="10" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - 162}" y="{y}">{escape(name)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
