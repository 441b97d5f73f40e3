"""Small numerical search helpers: golden-section refinement and
three-point parabolic interpolation of sampled extrema."""

from __future__ import annotations

import math

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


def golden_section_min(f, a: float, b: float, xtol: float) -> tuple:
    """Minimize a unimodal scalar function on [a, b].

    Returns (x, f(x)) with the bracket narrowed below xtol.
    """
    if not b > a:
        raise ValueError("need b > a for a golden-section bracket")
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def golden_section_max(f, a: float, b: float, xtol: float) -> tuple:
    x, fneg = golden_section_min(lambda t: -f(t), a, b, xtol)
    return x, -fneg


def parabola_vertex(x0, y0, x1, y1, x2, y2) -> tuple:
    """Vertex (x, y) of the parabola through three points.

    Used to refine a sampled extremum bracketed by its neighbours; falls
    back to the middle point when the three are collinear.
    """
    d1 = (y1 - y0) / (x1 - x0)
    d2 = (y2 - y1) / (x2 - x1)
    curv = (d2 - d1) / (x2 - x0)
    if curv == 0.0:
        return x1, y1
    xv = 0.5 * (x0 + x1 - d1 / curv)
    # evaluate the interpolating parabola at its vertex
    yv = y0 + d1 * (xv - x0) + curv * (xv - x0) * (xv - x1)
    return xv, yv
