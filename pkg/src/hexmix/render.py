"""Deterministic SVG rendering of hexagon tilings.

Height fields live on the square-ish coordinate grid; drawing shears it by
(x, y) -> (x - y/2, y*sqrt(3)/2) so unit cells become pairs of equilateral
triangles and the three lozenge orientations appear as 60-degree rhombi.
"""

from __future__ import annotations

import math

import numpy as np

from . import limitshape as ls
from .hexlattice import HeightField, HexlatticeError, level_lines

_SQ3 = math.sqrt(3.0)

# up-triangle at cell (x, y) has corners (x,y), (x+1,y), (x+1,y+1); its
# height pattern (h(x+1,y)-h(x,y), h(x+1,y+1)-h(x+1,y)) picks the down
# triangle it is glued to, and the resulting rhombus, by corner offsets:
_LOZENGES = {
    (0, 1): ((0, 0), (1, 0), (1, 1), (0, 1)),
    (0, 0): ((0, 0), (1, 0), (2, 1), (1, 1)),
    (-1, 1): ((0, -1), (1, 0), (1, 1), (0, 0)),
}
_COLORS = {(0, 1): "#4878cf", (0, 0): "#e8a33d", (-1, 1): "#d65454"}


def _shear(x: float, y: float) -> tuple[float, float]:
    return (x - 0.5 * y, 0.5 * _SQ3 * y)


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


class _Canvas:
    def __init__(self):
        self.parts: list[str] = []
        self.xs: list[float] = []
        self.ys: list[float] = []

    def poly(self, pts, fill: str, stroke: str = "#333333", width: float = 0.02):
        sp = [_shear(x, y) for x, y in pts]
        self.xs += [u for u, _ in sp]
        self.ys += [v for _, v in sp]
        d = " ".join(f"{_fmt(u)},{_fmt(-v)}" for u, v in sp)
        self.parts.append(
            f'<polygon points="{d}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}"/>'
        )

    def path(self, pts, stroke: str, width: float, dash: str | None = None):
        sp = [_shear(x, y) for x, y in pts]
        self.xs += [u for u, _ in sp]
        self.ys += [v for _, v in sp]
        d = "M " + " L ".join(f"{_fmt(u)} {_fmt(-v)}" for u, v in sp)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<path d="{d}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}" stroke-linejoin="round"{extra}/>'
        )

    def svg(self) -> str:
        pad = 0.6
        x0, x1 = min(self.xs) - pad, max(self.xs) + pad
        y0, y1 = min(self.ys) - pad, max(self.ys) + pad
        vb = f"{_fmt(x0)} {_fmt(-y1)} {_fmt(x1 - x0)} {_fmt(y1 - y0)}"
        head = (
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{vb}" width="{_fmt(40 * (x1 - x0))}" '
            f'height="{_fmt(40 * (y1 - y0))}">'
        )
        return head + "\n" + "\n".join(self.parts) + "\n</svg>\n"


def lozenges(f: HeightField) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """((dx1, dy2) pattern, cell) for every lozenge, one per up-triangle."""
    d = f.domain
    m = d.mask()
    out = []
    for x in range(d.nx - 1):
        for y in range(d.ny - 1):
            if not (m[x, y] and m[x + 1, y] and m[x + 1, y + 1]):
                continue
            pat = (int(f.h[x + 1, y] - f.h[x, y]),
                   int(f.h[x + 1, y + 1] - f.h[x + 1, y]))
            if pat not in _LOZENGES:
                raise HexlatticeError(f"inadmissible height pattern {pat} at {(x, y)}")
            out.append((pat, (x, y)))
    return out


def render_svg(
    f: HeightField,
    show_level_lines: bool = False,
    show_arctic: bool = False,
    show_analytic_levels: bool = False,
    q: float = 0.0,
    nscale: int | None = None,
) -> str:
    """Deterministic SVG of a tiling, with optional overlays: discrete
    level lines, the limit arctic curve, and the analytic level lines
    (both computed at tilt q on the rescaled hexagon)."""
    d = f.domain
    N = nscale if nscale is not None else d.na
    cv = _Canvas()
    for pat, (x, y) in lozenges(f):
        cv.poly([(x + dx, y + dy) for dx, dy in _LOZENGES[pat]], _COLORS[pat])
    if show_level_lines:
        for line in level_lines(f):
            cv.path([(x, float(y)) for x, y in line.points()], "#111111", 0.07)
    if show_arctic or show_analytic_levels:
        p = ls.ShapeParams(q, d.na / N, d.nb / N, d.nc / N)
        if show_arctic:
            arc = ls.arctic_polyline(p)
            pts = [(N * u, N * v) for u, v in arc]
            cv.path(pts + pts[:1], "#ffffff", 0.12)
        if show_analytic_levels:
            xs = np.linspace(0.0, p.a + p.c, 160)
            for k in range(1, d.nb + 1):
                h = k / N if k < d.nb else p.b
                pts = [(N * u, N * ls.level_line_U(min(h, p.b), u, p)) for u in xs]
                cv.path(pts, "#145214", 0.08, dash="0.15,0.1")
    return cv.svg()
