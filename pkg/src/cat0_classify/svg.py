"""Deterministic SVG figures of planar covers and axes."""

from __future__ import annotations

import math

from .spaces import DomainError, EuclideanSpace

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _embedding(gram):
    """Columns of a lower-triangular factor: lattice coordinates to the plane."""
    g11, g12, g22 = float(gram[0][0]), float(gram[0][1]), float(gram[1][1])
    a = math.sqrt(g11)
    b = g12 / a
    c = math.sqrt(max(g22 - b * b, 0.0))
    return (a, 0.0), (b, c)


def _fmt(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def emit_svg(space, cover=None, axes_cover=None, window_R=2, size: int = 480) -> str:
    """Cover balls coloured by orbit, axes coloured by parallel class, and the window."""
    if not isinstance(space, EuclideanSpace) or space.dim != 2:
        raise DomainError("figures are drawn for the Euclidean plane only")
    e1, e2 = _embedding(space.gram)
    R = float(window_R)
    half = R + 1.0
    scale = size / (2 * half)

    def plane(p):
        x = float(p[0]) * e1[0] + float(p[1]) * e2[0]
        y = float(p[0]) * e1[1] + float(p[1]) * e2[1]
        return (x + half) * scale, (half - y) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    cx, cy = plane((0, 0))
    out.append(f'<circle class="window" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(R * scale)}" fill="none" stroke="black" stroke-width="1.5"/>')
    if axes_cover is not None:
        for k, (d, cov) in enumerate(zip(axes_cover.directions, axes_cover.covers)):
            colour = PALETTE[k % len(PALETTE)]
            pc = axes_cover.classes[d]
            dx = float(d[0]) * e1[0] + float(d[1]) * e2[0]
            dy = float(d[0]) * e1[1] + float(d[1]) * e2[1]
            norm = math.hypot(dx, dy)
            dx, dy = dx / norm, dy / norm
            out.append(f'<g class="axes-class" data-direction="{",".join(str(x) for x in d)}" stroke="{colour}" stroke-width="0.8">')
            for b in cov.balls:
                anchor = pc.from_base(b.center).anchor
                ax, ay = plane(anchor)
                L = 2 * half * scale
                out.append(f'<line x1="{_fmt(ax - L * dx)}" y1="{_fmt(ay + L * dy)}" x2="{_fmt(ax + L * dx)}" y2="{_fmt(ay - L * dy)}"/>')
            out.append("</g>")
    if cover is not None:
        out.append('<g class="cover" fill-opacity="0.15" stroke-width="0.6">')
        for b in cover.balls:
            x, y = plane(b.center)
            r = math.sqrt(float(b.radius_sq)) * scale
            colour = PALETTE[b.orbit % len(PALETTE)]
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{colour}" stroke="{colour}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
