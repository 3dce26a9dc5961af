"""Deterministic SVG drawings of cells with vertex values."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Optional, Tuple

from .fractal import FractalSpec, SpecError, VertexId, build_graph
from .rational import fmt_rational

WIDTH = 640
MARGIN = 48


def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _color(t: float) -> str:
    """Blue (low) to red (high)."""
    t = min(max(t, 0.0), 1.0)
    r = int(round(40 + 200 * t))
    b = int(round(240 - 200 * t))
    return f"#{r:02x}50{b:02x}"


def _ordered(points):
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    return sorted(points, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))


def render_svg(spec: FractalSpec, values: Optional[Mapping[VertexId, Fraction]] = None, depth: Optional[int] = None,
               title: Optional[str] = None) -> str:
    """Cells of depth `depth` as polygons, with labelled and coloured vertex values.

    With no values the drawing shows the cells and the boundary points only.
    """
    emb = spec.embedding
    if emb is None:
        raise SpecError("spec has no embedding; cannot plot")
    values = dict(values or {})
    if depth is None:
        depth = max((v.depth for v in values), default=0)
    graph = build_graph(spec, depth)

    def pos(v: VertexId) -> Tuple[float, float]:
        return emb.apply(v.word, emb.points[v.index])

    coords = [pos(v) for v in graph.vertices]
    xs, ys = [c[0] for c in coords], [c[1] for c in coords]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    scale = (WIDTH - 2 * MARGIN) / span
    height = int(round((max(ys) - min(ys)) * scale + 2 * MARGIN))

    def tx(p):
        return MARGIN + (p[0] - min(xs)) * scale, height - MARGIN - (p[1] - min(ys)) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN // 2}" font-family="sans-serif" font-size="14">{title}</text>')
    for w in sorted(graph.cells):
        pts = _ordered([tx(coords[x]) for x in graph.cells[w]])
        if len(pts) == 2:
            (x1, y1), (x2, y2) = pts
            out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="black" stroke-width="1"/>')
        else:
            path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
            out.append(f'<polygon points="{path}" fill="none" stroke="black" stroke-width="1"/>')
    nums = [float(v) for v in values.values()]
    lo, hi = (min(nums), max(nums)) if nums else (0.0, 0.0)
    for x, v in enumerate(graph.vertices):
        px, py = tx(coords[x])
        if v in values:
            t = 0.5 if hi == lo else (float(values[v]) - lo) / (hi - lo)
            out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="4" fill="{_color(t)}"/>')
            out.append(f'<text x="{_fmt(px + 6)}" y="{_fmt(py - 6)}" font-family="sans-serif" font-size="11">'
                       f"{fmt_rational(values[v])}</text>")
        elif v.depth == 0:
            out.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
