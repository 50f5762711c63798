"""Discrete geometry of lozenge tilings of the a x b x c hexagon.

Tilings are encoded as integer height fields on the vertices of the
hexagonal region

    0 <= x <= na + nc,   0 <= y <= nb + nc,   y - x <= nb,   x - y <= na,

with admissibility constraints

    h(x+1, y)   - h(x, y) in {-1, 0}
    h(x, y+1)   - h(x, y) in {0, 1}
    h(x+1, y+1) - h(x, y) in {0, 1}

and boundary values forced by the domain shape.  The height field is the
single source of truth; lozenge lists and level lines are derived views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

# A height array stores OUTSIDE at vertices not in the hexagon.
OUTSIDE = np.iinfo(np.int64).min


class HexlatticeError(ValueError):
    pass


@dataclass(frozen=True)
class HexDomain:
    """Hexagonal lattice domain with side lengths (na, nb, nc)."""

    na: int
    nb: int
    nc: int

    def __post_init__(self):
        if min(self.na, self.nb, self.nc) < 1:
            raise HexlatticeError(
                f"side lengths must be >= 1, got {(self.na, self.nb, self.nc)}"
            )

    @property
    def nx(self) -> int:
        return self.na + self.nc + 1

    @property
    def ny(self) -> int:
        return self.nb + self.nc + 1

    @property
    def corners(self):
        na, nb, nc = self.na, self.nb, self.nc
        return [(0, 0), (na, 0), (na + nc, nc), (na + nc, nb + nc), (nc, nb + nc), (0, nb)]

    def contains(self, x: int, y: int) -> bool:
        return (
            0 <= x <= self.na + self.nc
            and 0 <= y <= self.nb + self.nc
            and y - x <= self.nb
            and x - y <= self.na
        )

    @lru_cache(maxsize=None)
    def mask(self) -> np.ndarray:
        """Boolean (nx, ny) array marking vertices of the hexagon."""
        x, y = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        m = (y - x <= self.nb) & (x - y <= self.na)
        m.setflags(write=False)
        return m

    @lru_cache(maxsize=None)
    def interior_mask(self) -> np.ndarray:
        """Vertices whose six neighbours all lie in the hexagon."""
        x, y = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        m = (
            (x > 0)
            & (x < self.na + self.nc)
            & (y > 0)
            & (y < self.nb + self.nc)
            & (y - x < self.nb)
            & (x - y < self.na)
        )
        m.setflags(write=False)
        return m

    @lru_cache(maxsize=None)
    def vertices(self):
        m = self.mask()
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(m))]

    @lru_cache(maxsize=None)
    def interior_vertices(self):
        m = self.interior_mask()
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(m))]

    def boundary_height(self, x: int, y: int) -> int | None:
        """Forced height on the hexagon boundary, None for interior points."""
        na, nb, nc = self.na, self.nb, self.nc
        if y == 0 or x - y == na:
            return 0
        if y - x == nb or y == nb + nc:
            return nb
        if x == 0:
            return y
        if x == na + nc:
            return y - nc
        return None

    def column_range(self, x: int) -> tuple[int, int]:
        """Inclusive y-range of column x."""
        return max(0, x - self.na), min(self.nb + self.nc, x + self.nb)

    def lozenge_capacity(self) -> int:
        """Number of lozenges in any tiling (na*nb + nb*nc + nc*na)."""
        return self.na * self.nb + self.nb * self.nc + self.nc * self.na


def make_domain(na: int, nb: int, nc: int) -> HexDomain:
    return HexDomain(na, nb, nc)


@dataclass(frozen=True)
class HeightField:
    """Admissible height field on a hexagon domain.

    ``h`` is an (nx, ny) int64 array with OUTSIDE at non-domain vertices.
    Treated as immutable; all operations return new fields.
    """

    domain: HexDomain
    h: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.h.setflags(write=False)

    def value(self, x: int, y: int) -> int:
        if not self.domain.contains(x, y):
            raise HexlatticeError(f"vertex {(x, y)} outside domain")
        return int(self.h[x, y])

    def with_value(self, x: int, y: int, v: int) -> "HeightField":
        h = self.h.copy()
        h[x, y] = v
        return HeightField(self.domain, h)

    def key(self) -> bytes:
        return self.h.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HeightField)
            and self.domain == other.domain
            and np.array_equal(self.h, other.h)
        )

    def __le__(self, other: "HeightField") -> bool:
        _check_same_domain(self, other)
        m = self.domain.mask()
        return bool(np.all(self.h[m] <= other.h[m]))

    def __hash__(self):
        return hash((self.domain, self.key()))


def _check_same_domain(f: HeightField, g: HeightField):
    if f.domain != g.domain:
        raise HexlatticeError("height fields live on different domains")


def _boundary_array(d: HexDomain) -> tuple[np.ndarray, np.ndarray]:
    """(values, forced) where forced marks boundary vertices."""
    vals = np.full((d.nx, d.ny), OUTSIDE, dtype=np.int64)
    forced = np.zeros((d.nx, d.ny), dtype=bool)
    for x, y in d.vertices():
        b = d.boundary_height(x, y)
        if b is not None:
            vals[x, y] = b
            forced[x, y] = True
    return vals, forced


# Admissibility constraints as h(z) <= h(z + step) + slack, over the six
# incident edges (both orientations of the three step directions).
_UPPER = [((-1, 0), 0), ((0, 1), 0), ((1, 0), 1), ((0, -1), 1), ((1, 1), 0), ((-1, -1), 1)]
_LOWER = [((1, 0), 0), ((0, -1), 0), ((-1, 0), -1), ((0, 1), -1), ((-1, -1), 0), ((1, 1), -1)]


def is_admissible(f: HeightField) -> bool:
    d = f.domain
    h = f.h
    for x, y in d.vertices():
        b = d.boundary_height(x, y)
        if b is not None and h[x, y] != b:
            return False
        for (dx, dy), slack in _UPPER:
            nx_, ny_ = x + dx, y + dy
            if d.contains(nx_, ny_) and h[x, y] > h[nx_, ny_] + slack:
                return False
    return True


@lru_cache(maxsize=None)
def extreme_tilings(d: HexDomain) -> tuple[HeightField, HeightField]:
    """(minimal, maximal) height fields of the domain."""
    vals, forced = _boundary_array(d)
    verts = d.vertices()

    hmax = vals.copy()
    hmax[~forced & d.mask()] = d.nb  # global upper bound
    changed = True
    while changed:
        changed = False
        for order in (verts, verts[::-1]):
            for x, y in order:
                if forced[x, y]:
                    continue
                v = hmax[x, y]
                for (dx, dy), slack in _UPPER:
                    nx_, ny_ = x + dx, y + dy
                    if d.contains(nx_, ny_):
                        v = min(v, hmax[nx_, ny_] + slack)
                if v != hmax[x, y]:
                    hmax[x, y] = v
                    changed = True

    hmin = vals.copy()
    hmin[~forced & d.mask()] = 0
    changed = True
    while changed:
        changed = False
        for order in (verts, verts[::-1]):
            for x, y in order:
                if forced[x, y]:
                    continue
                v = hmin[x, y]
                for (dx, dy), slack in _LOWER:
                    nx_, ny_ = x + dx, y + dy
                    if d.contains(nx_, ny_):
                        v = max(v, hmin[nx_, ny_] + slack)
                if v != hmin[x, y]:
                    hmin[x, y] = v
                    changed = True

    lo, hi = HeightField(d, hmin), HeightField(d, hmax)
    assert is_admissible(lo) and is_admissible(hi)
    return lo, hi


@dataclass(frozen=True)
class FlipSite:
    x: int
    y: int
    h_min: int
    h_max: int


def local_bounds(f: HeightField, x: int, y: int) -> tuple[int, int]:
    """Extreme admissible heights at (x, y) given its neighbours.

    The site is flippable exactly when the two bounds differ (by one).
    Boundary vertices return their forced value twice.
    """
    d = f.domain
    if not d.contains(x, y):
        raise HexlatticeError(f"vertex {(x, y)} outside domain")
    b = d.boundary_height(x, y)
    if b is not None:
        return b, b
    h = f.h
    hi = d.nb
    lo = 0
    for (dx, dy), slack in _UPPER:
        hi = min(hi, int(h[x + dx, y + dy]) + slack)
    for (dx, dy), slack in _LOWER:
        lo = max(lo, int(h[x + dx, y + dy]) + slack)
    return lo, hi


def flippable(f: HeightField) -> set[FlipSite]:
    out = set()
    for x, y in f.domain.interior_vertices():
        lo, hi = local_bounds(f, x, y)
        if hi > lo:
            out.add(FlipSite(x, y, lo, hi))
    return out


def flip(f: HeightField, x: int, y: int) -> HeightField:
    """Rotate the three lozenges around a flippable site."""
    lo, hi = local_bounds(f, x, y)
    if hi == lo:
        raise HexlatticeError(f"site {(x, y)} is not flippable")
    cur = int(f.h[x, y])
    return f.with_value(x, y, hi if cur == lo else lo)


def meet_join(f: HeightField, g: HeightField) -> tuple[HeightField, HeightField]:
    """Pointwise (min, max); both are admissible height fields."""
    _check_same_domain(f, g)
    m = f.domain.mask()
    lo = np.where(m, np.minimum(f.h, g.h), OUTSIDE)
    hi = np.where(m, np.maximum(f.h, g.h), OUTSIDE)
    return HeightField(f.domain, lo), HeightField(f.domain, hi)


def volume(f: HeightField) -> int:
    return int(f.h[f.domain.mask()].sum())


@dataclass(frozen=True)
class LevelLine:
    """Bernoulli path separating {h < k} from {h >= k}, on the half-integer
    shifted lattice.  Point at column x is (x, crossing(x) - 1/2)."""

    k: int
    start: tuple[int, Fraction]
    steps: tuple[str, ...]  # over {"SE", "NE"}

    def points(self):
        x, y = self.start
        pts = [(x, y)]
        for s in self.steps:
            x += 1
            if s == "NE":
                y += 1
            pts.append((x, y))
        return pts


def extract_level_line(f: HeightField, k: int) -> LevelLine:
    d = f.domain
    if not 1 <= k <= d.nb:
        raise HexlatticeError(f"level k={k} out of range [1, {d.nb}]")
    crossings = []
    for x in range(d.nx):
        y0, y1 = d.column_range(x)
        col = f.h[x, y0 : y1 + 1]
        above = np.nonzero(col >= k)[0]
        assert above.size, "every column reaches the top levels"
        crossings.append(y0 + int(above[0]))
    steps = []
    for x in range(d.nx - 1):
        dy = crossings[x + 1] - crossings[x]
        assert dy in (0, 1), "level line must be a Bernoulli path"
        steps.append("NE" if dy == 1 else "SE")
    start = (0, Fraction(2 * crossings[0] - 1, 2))
    return LevelLine(k, start, tuple(steps))


def level_lines(f: HeightField) -> list[LevelLine]:
    return [extract_level_line(f, k) for k in range(1, f.domain.nb + 1)]


def field_from_level_lines(d: HexDomain, lines: list[LevelLine]) -> HeightField:
    """Inverse of level-line extraction: h(x, y) = #{k : crossing_k(x) <= y}."""
    if len(lines) != d.nb:
        raise HexlatticeError(f"expected {d.nb} level lines, got {len(lines)}")
    h = np.full((d.nx, d.ny), OUTSIDE, dtype=np.int64)
    crossings = {}
    for line in lines:
        pts = line.points()
        crossings[line.k] = [int(y + Fraction(1, 2)) for _, y in pts]
    for x, y in d.vertices():
        h[x, y] = sum(1 for k in crossings if crossings[k][x] <= y)
    out = HeightField(d, h)
    if not is_admissible(out):
        raise HexlatticeError("level lines do not assemble into a tiling")
    return out


# ---------------------------------------------------------------------------
# symmetries


def symmetry_apply(f: HeightField, s: str) -> HeightField:
    """Apply a hexagon symmetry.

    ``complement``: point reflection through the centre combined with the
    height flip h -> nb - h; maps the domain to itself and reverses the
    partial order.  ``transpose``: reflection swapping the roles of the a-
    and b-sides; the image lives on the (nb, na, nc) domain.
    """
    d = f.domain
    if s == "identity":
        return f
    if s == "complement":
        h = np.full((d.nx, d.ny), OUTSIDE, dtype=np.int64)
        X, Y = d.na + d.nc, d.nb + d.nc
        for x, y in d.vertices():
            h[x, y] = d.nb - f.h[X - x, Y - y]
        out = HeightField(d, h)
    elif s == "transpose":
        d2 = HexDomain(d.nb, d.na, d.nc)
        h = np.full((d2.nx, d2.ny), OUTSIDE, dtype=np.int64)
        for x, y in d2.vertices():
            h[x, y] = y - x + f.h[y, x]
        out = HeightField(d2, h)
    else:
        raise HexlatticeError(f"unknown symmetry {s!r}")
    assert is_admissible(out)
    return out


# ---------------------------------------------------------------------------
# enumeration oracles


def enumerate_all(d: HexDomain, limit: int = 100_000) -> list[HeightField]:
    """Every admissible height field, by DFS over vertices in (x, y) order.

    Refuses (rather than truncates) when the state count exceeds ``limit``.
    Output order is deterministic.
    """
    lo, hi = extreme_tilings(d)
    verts = sorted(d.vertices())
    free = [(x, y) for x, y in verts if d.boundary_height(x, y) is None]
    base = lo.h.copy()

    results: list[HeightField] = []

    def bounds_at(h, x, y):
        vlo, vhi = int(lo.h[x, y]), int(hi.h[x, y])
        # constraints against already-assigned smaller-(x,y) neighbours
        for (dx, dy), slack in _UPPER:
            nx_, ny_ = x + dx, y + dy
            if (nx_, ny_) < (x, y) and d.contains(nx_, ny_):
                vhi = min(vhi, int(h[nx_, ny_]) + slack)
        for (dx, dy), slack in _LOWER:
            nx_, ny_ = x + dx, y + dy
            if (nx_, ny_) < (x, y) and d.contains(nx_, ny_):
                vlo = max(vlo, int(h[nx_, ny_]) + slack)
        return vlo, vhi

    def rec(i, h):
        if i == len(free):
            cand = HeightField(d, h.copy())
            if is_admissible(cand):
                if len(results) >= limit:
                    raise HexlatticeError(
                        f"state count exceeds limit={limit} for {d}"
                    )
                results.append(cand)
            return
        x, y = free[i]
        vlo, vhi = bounds_at(h, x, y)
        for v in range(vlo, vhi + 1):
            h[x, y] = v
            rec(i + 1, h)
        h[x, y] = base[x, y]

    rec(0, base.copy())
    return results


def count_tilings_macmahon(na: int, nb: int, nc: int) -> int:
    """MacMahon's boxed-plane-partition product formula."""
    out = Fraction(1)
    for i in range(1, na + 1):
        for j in range(1, nb + 1):
            for k in range(1, nc + 1):
                out *= Fraction(i + j + k - 1, i + j + k - 2)
    assert out.denominator == 1
    return out.numerator


def count_tilings_paths(na: int, nb: int, nc: int) -> int:
    """Lindstrom-Gessel-Viennot determinant over the level-line ensemble.

    Line k runs from (0, k - 1/2) to (na+nc, k+nc-1/2) with SE/NE steps, so
    the (i, j) path count is C(na+nc, nc + j - i).
    """
    n = nb
    mat = [[math.comb(na + nc, nc + j - i) if 0 <= nc + j - i <= na + nc else 0
            for j in range(n)] for i in range(n)]
    return _int_det(mat)


def _int_det(mat: list[list[int]]) -> int:
    """Fraction-free Bareiss determinant of an integer matrix."""
    a = [row[:] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
