"""SVG heatmaps of 50 x 47 court surfaces."""
from __future__ import annotations

import numpy as np

from .court import CORNER_DEPTH, CORNER_OFFSET, HOOP, RESTRICTED_RADIUS, THREE_RADIUS

SIGNED_KINDS = ("rank_corr", "plc")
SCALE = 10  # px per foot

_SEQ = ((255, 255, 255), (254, 224, 139), (244, 109, 67), (165, 0, 38))
_DIV = ((49, 54, 149), (171, 217, 233), (247, 247, 247), (253, 174, 97), (165, 0, 38))


def is_signed(kind: str) -> bool:
    return kind.startswith(SIGNED_KINDS)


def _ramp(stops, t):
    t = float(np.clip(t, 0.0, 1.0))
    pos = t * (len(stops) - 1)
    i = min(int(pos), len(stops) - 2)
    f = pos - i
    c = [round(a + (b - a) * f) for a, b in zip(stops[i], stops[i + 1])]
    return "#%02x%02x%02x" % tuple(c)


def color_scale(values, signed: bool):
    """(lo, hi, colour function).  Signed scales are symmetric about 0."""
    v = np.asarray(values, dtype=float)
    if signed:
        m = float(np.max(np.abs(v))) if v.size else 0.0
        lo, hi = -m, m
        return lo, hi, (lambda x: _ramp(_DIV, 0.5 if m == 0 else 0.5 + x / (2 * m)))
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    return lo, hi, (lambda x: _ramp(_SEQ, 0.0 if span == 0 else (x - lo) / span))


def _court_lines(h_px):
    def y(ft):
        return h_px - ft * SCALE

    hx, hy = HOOP[0] * SCALE, y(HOOP[1])
    r3 = THREE_RADIUS * SCALE
    dy = np.sqrt(THREE_RADIUS ** 2 - CORNER_OFFSET ** 2) * SCALE
    left = (HOOP[0] - CORNER_OFFSET) * SCALE
    right = (HOOP[0] + CORNER_OFFSET) * SCALE
    ra = RESTRICTED_RADIUS * SCALE
    style = 'fill="none" stroke="#333333" stroke-width="1.5"'
    return [
        f'<rect x="0" y="0" width="{50 * SCALE}" height="{47 * SCALE}" {style}/>',
        f'<line x1="{left:.1f}" y1="{h_px}" x2="{left:.1f}" y2="{y(CORNER_DEPTH):.1f}" {style}/>',
        f'<line x1="{right:.1f}" y1="{h_px}" x2="{right:.1f}" y2="{y(CORNER_DEPTH):.1f}" {style}/>',
        f'<path d="M {left:.1f} {hy - dy:.1f} A {r3:.1f} {r3:.1f} 0 0 1 {right:.1f} '
        f'{hy - dy:.1f}" {style}/>',
        f'<rect x="{17 * SCALE}" y="{y(19):.1f}" width="{16 * SCALE}" height="{19 * SCALE}" {style}/>',
        f'<circle cx="{hx:.1f}" cy="{hy:.1f}" r="7.5" {style}/>',
        f'<path d="M {hx - ra:.1f} {hy:.1f} A {ra:.1f} {ra:.1f} 0 0 1 {hx + ra:.1f} {hy:.1f}" {style}/>',
    ]


def surface_svg(values, kind: str, title: str = "", width: int = 50, depth: int = 47) -> str:
    """SVG document with one rectangle per cell, court outline and legend.

    Row 0 (the baseline) is drawn at the bottom.
    """
    vals = np.asarray(values, dtype=float).reshape(depth, width)
    signed = is_signed(kind)
    lo, hi, colour = color_scale(vals, signed)
    w_px, h_px = width * SCALE, depth * SCALE
    legend_h = 60
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px}" '
           f'height="{h_px + legend_h}" viewBox="0 0 {w_px} {h_px + legend_h}">',
           f'<title>{title or kind}</title>',
           '<g class="cells" shape-rendering="crispEdges">']
    for row in range(depth):
        for col in range(width):
            v = vals[row, col]
            out.append(f'<rect class="cell" x="{col * SCALE}" y="{h_px - (row + 1) * SCALE}" '
                       f'width="{SCALE}" height="{SCALE}" fill="{colour(v)}"/>')
    out.append('</g>')
    out.extend(_court_lines(h_px))
    # legend: 20 swatches from lo to hi
    out.append(f'<g class="legend" data-lo="{lo:.6g}" data-hi="{hi:.6g}"'
               f'{" data-mid=" + chr(34) + "0" + chr(34) if signed else ""}>')
    n = 20
    sw = (w_px - 40) / n
    for k in range(n):
        x = lo + (hi - lo) * (k + 0.5) / n
        out.append(f'<rect x="{20 + k * sw:.1f}" y="{h_px + 10}" width="{sw:.1f}" '
                   f'height="15" fill="{colour(x)}"/>')
    out.append(f'<text x="20" y="{h_px + 45}" font-size="12">{lo:.4g}</text>')
    if signed:
        out.append(f'<text x="{w_px / 2:.0f}" y="{h_px + 45}" font-size="12" '
                   f'text-anchor="middle">0</text>')
    out.append(f'<text x="{w_px - 20}" y="{h_px + 45}" font-size="12" '
               f'text-anchor="end">{hi:.4g}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
