"""Deterministic SVG rendering of tilings with an optional height overlay."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .enumeration import Tiling, domino_cells

CELL = 20
MARGIN = 10
FILL = {"H": "#9ecae1", "V": "#fdae6b"}


def render_tiling_svg(region, tiling: Tiling, heights: np.ndarray | None = None, grid=None,
                      cell: int = CELL) -> str:
    """SVG with one rect per domino (y axis pointing up) and, if given, vertex height labels.

    ``heights`` is an array on ``grid``'s layout (see height.VertexGrid);
    labels are drawn at region vertices only.
    """
    cells = sorted(region.cells)
    if not tiling.is_valid_on(region.cells):
        raise ValueError("tiling does not partition the region")
    if cells:
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        x0, x1, y0, y1 = min(xs), max(xs) + 1, min(ys), max(ys) + 1
    else:
        x0 = x1 = y0 = y1 = 0
    W = (x1 - x0) * cell + 2 * MARGIN
    H = (y1 - y0) * cell + 2 * MARGIN

    def px(x):
        return MARGIN + (x - x0) * cell

    def py(y):
        return H - MARGIN - (y - y0) * cell

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    for i, j, o in sorted(tiling.dominoes):
        (a, b), (c, d) = domino_cells((i, j, o))
        w = (c - a + 1) * cell
        h = (d - b + 1) * cell
        out.append(
            f'<rect class="domino" x="{px(a)}" y="{py(b) - h}" width="{w}" height="{h}" '
            f'fill="{FILL[o]}" stroke="black" stroke-width="1"/>'
        )
    if heights is not None and grid is not None:
        X, Y = grid.coords
        for gx, gy in zip(*np.nonzero(grid.inside)):
            val = heights[gx, gy]
            label = escape(str(int(val)) if float(val).is_integer() else f"{float(val):.2f}")
            out.append(
                f'<text x="{px(int(X[gx, gy]))}" y="{py(int(Y[gx, gy]))}" font-size="{cell // 2}" '
                f'text-anchor="middle" dominant-baseline="middle">{label}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
