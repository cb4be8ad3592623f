"""Minimal SVG histogram writer with a density overlay, no plotting stack."""
from __future__ import annotations

import numpy as np

from .stats import semicircle_pdf

WIDTH, HEIGHT = 640, 400
MARGIN = 40


def histogram_density(samples, bins=60, lo=-2.5, hi=2.5):
    """Normalized histogram over ``[lo, hi]``; bar areas sum to 1 over in-range samples."""
    heights, edges = np.histogram(np.asarray(samples, dtype=float), bins=bins,
                                  range=(lo, hi), density=True)
    return heights, edges


def histogram_svg(samples, bins=60, lo=-2.5, hi=2.5, title="") -> str:
    heights, edges = histogram_density(samples, bins, lo, hi)
    grid = np.linspace(lo, hi, 401)
    dens = semicircle_pdf(grid)
    ymax = max(float(heights.max()) if heights.size else 0.0, float(dens.max())) * 1.1 or 1.0
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - lo) / (hi - lo) * pw

    def sy(y):
        return MARGIN + ph - y / ymax * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="{MARGIN / 2 + 5:.1f}" '
                   f'text-anchor="middle" font-size="14">{title}</text>')
    out.append(f'<line x1="{MARGIN}" y1="{MARGIN + ph}" x2="{MARGIN + pw}" y2="{MARGIN + ph}" '
               'stroke="black"/>')
    for x in (-2, -1, 0, 1, 2):
        if lo <= x <= hi:
            out.append(f'<text x="{sx(x):.2f}" y="{MARGIN + ph + 16}" text-anchor="middle" '
                       f'font-size="11">{x}</text>')
    out.append(f'<g class="histogram" data-bins="{bins}" data-lo="{lo!r}" data-hi="{hi!r}">')
    for h, a, b in zip(heights, edges[:-1], edges[1:]):
        out.append(
            f'<rect x="{sx(a):.3f}" y="{sy(h):.3f}" width="{sx(b) - sx(a):.3f}" '
            f'height="{sy(0) - sy(h):.3f}" fill="steelblue" stroke="white" stroke-width="0.5" '
            f'data-left="{float(a)!r}" data-width="{float(b - a)!r}" data-density="{float(h)!r}"/>')
    out.append('</g>')
    pts = " L ".join(f"{sx(x):.3f} {sy(y):.3f}" for x, y in zip(grid, dens))
    out.append(f'<path class="semicircle" d="M {pts}" fill="none" stroke="crimson" '
               'stroke-width="2"/>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
