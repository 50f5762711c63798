"""Numerical evaluation of the volume-tilted macroscopic height profile.

For the continuum hexagon with side lengths (a, b, c) and tilt q, the
limit shape is encoded by a complex slope f(x, y): the gradient of the
profile is read off the arguments of f and f - 1, the liquid (rough)
region is where Im f > 0, and its boundary is the real conic xi = 0
inscribed in the hexagon.  Everything here reduces to the tilted
coordinates

    X = -[-x],  Y = -[-y],  [z] = (e^{-qz} - 1) / (e^{-q} - 1),

in which xi is an explicit quadratic polynomial; heights are recovered by
integrating the vertical slope component up each column, with frozen
regions handled by their exact affine formulas.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

LIQUID = "liquid"
BOUNDARY = "boundary"
FROZEN = ("frozenSW", "frozenS", "frozenSE", "frozenNE", "frozenN", "frozenNW")

# phase-classification tolerance on xi
_XI_TOL = 1e-12


class ShapeError(ValueError):
    pass


def bracket(z, q: float):
    """Tilted linear coordinate [z]; equals z at q = 0.

    Near q = 0 a 3-term series in q avoids the 0/0 form; the crossover at
    |q| = 1e-6 agrees with the exact expression to 1e-12.
    """
    if abs(q) < 1e-6:
        return z * (1.0 + q * (1.0 - z) / 2.0 + q * q * (2.0 * z - 1.0) * (z - 1.0) / 12.0)
    if isinstance(z, complex):
        return cmath.expm1(-q * z) / math.expm1(-q)
    return math.expm1(-q * z) / math.expm1(-q)


@dataclass(frozen=True)
class ShapeParams:
    q: float
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ShapeError("side lengths must be positive")

    # tilted side lengths -------------------------------------------------
    @property
    def A(self) -> float:
        return -bracket(-self.a, self.q)

    @property
    def B(self) -> float:
        return bracket(self.b, self.q)

    @property
    def C(self) -> float:
        return bracket(self.b + self.c, self.q) - bracket(self.b, self.q)

    @property
    def E(self) -> float:
        """e^{-q} - 1, the tilt factor appearing in the conic."""
        if abs(self.q) < 1e-6:
            q = self.q
            return -q * (1.0 - q / 2.0 + q * q / 6.0)
        return math.expm1(-self.q)

    # coordinate maps -----------------------------------------------------
    def XY(self, x: float, y: float) -> tuple[float, float]:
        return -bracket(-x, self.q), -bracket(-y, self.q)

    def x_of_X(self, X: float) -> float:
        if abs(self.q) < 1e-6:
            # invert the bracket series by one Newton step from X
            x = X
            for _ in range(3):
                x -= (-bracket(-x, self.q) - X) / self.dXdx(x)
            return x
        return math.log1p(-X * self.E) / self.q

    def dXdx(self, x: float) -> float:
        if abs(self.q) < 1e-6:
            q = self.q
            # d/dx of the series for -[-x]
            return 1.0 + q * (0.5 + x) + q * q * (6.0 * x * x + 6.0 * x + 1.0) / 12.0
        return self.q * math.exp(self.q * x) / (-self.E)

    # hexagon geometry ----------------------------------------------------
    @property
    def corners(self):
        a, b, c = self.a, self.b, self.c
        return [(0.0, 0.0), (a, 0.0), (a + c, c), (a + c, b + c), (c, b + c), (0.0, b)]

    def in_hexagon(self, x: float, y: float, tol: float = 1e-12) -> bool:
        a, b, c = self.a, self.b, self.c
        return (
            -tol <= x <= a + c + tol
            and -tol <= y <= b + c + tol
            and y - x <= b + tol
            and x - y <= a + tol
        )


# Sides in anticlockwise order, with their lateral direction v (Def of the
# sideways distance) and the frozen corner regions adjacent to each side.
SIDES = ("SW", "SE", "E", "NE", "NW", "W")
_SIDE_V = {
    "SW": (1.0, 0.0),
    "SE": (1.0, 1.0),
    "E": (0.0, 1.0),
    "NE": (-1.0, 0.0),
    "NW": (-1.0, -1.0),
    "W": (0.0, -1.0),
}
# frozen corner components, anticlockwise, starting at the (0,0) corner;
# component i lies between tangency points of side i-1 and side i in SIDES
_CORNERS_CCW = ("frozenSW", "frozenS", "frozenSE", "frozenNE", "frozenN", "frozenNW")


def _side_segments(p: ShapeParams):
    cs = p.corners
    return {s: (cs[i], cs[(i + 1) % 6]) for i, s in enumerate(SIDES)}


def frozen_affine(component: str, x: float, y: float, p: ShapeParams) -> float:
    a, b, c = p.a, p.b, p.c
    if component == "frozenS":
        return 0.0
    if component == "frozenN":
        return b
    if component == "frozenSW":
        return y
    if component == "frozenNE":
        return y - c
    if component == "frozenSE":
        return y - x + a
    if component == "frozenNW":
        return y - x
    raise ShapeError(f"not a frozen component: {component}")


def frozen_gradient(component: str) -> tuple[float, float]:
    if component in ("frozenS", "frozenN"):
        return (0.0, 0.0)
    if component in ("frozenSW", "frozenNE"):
        return (0.0, 1.0)
    return (-1.0, 1.0)


# ---------------------------------------------------------------------------
# the arctic conic


@lru_cache(maxsize=None)
def conic_coeffs(p: ShapeParams):
    """(aXX, aXY, aYY, bX, bY, c0) with xi = aXX X^2 + aXY XY + ... + c0."""
    A, B, C, E = p.A, p.B, p.C, p.E
    al = B + C
    k = E * A * B - (A + C)
    return (
        al * al,
        2.0 * al * k + 4.0 * A * B,
        k * k + 4.0 * A * B * E * (A + C),
        -2.0 * al * A * B,
        -2.0 * k * A * B - 4.0 * A * B * (A + C),
        A * B * A * B,
    )


def xi_eta_zeta(X: float, Y: float, p: ShapeParams) -> tuple[float, float, float]:
    A, B, C, E = p.A, p.B, p.C, p.E
    al = B + C
    k = E * A * B - (A + C)
    L = al * X + k * Y - A * B
    M = (A + C) - X - E * (A + C) * Y
    xi = L * L - 4.0 * A * B * Y * M
    eta = -L
    zeta = 2.0 * M
    return xi, eta, zeta


def xi_xy(x: float, y: float, p: ShapeParams) -> float:
    X, Y = p.XY(x, y)
    return xi_eta_zeta(X, Y, p)[0]


def xi_grad_XY(X: float, Y: float, p: ShapeParams) -> tuple[float, float]:
    aXX, aXY, aYY, bX, bY, _ = conic_coeffs(p)
    return 2.0 * aXX * X + aXY * Y + bX, 2.0 * aYY * Y + aXY * X + bY


@lru_cache(maxsize=None)
def conic_center_XY(p: ShapeParams) -> tuple[float, float]:
    aXX, aXY, aYY, bX, bY, _ = conic_coeffs(p)
    m = np.array([[2.0 * aXX, aXY], [aXY, 2.0 * aYY]])
    Xc, Yc = np.linalg.solve(m, [-bX, -bY])
    return float(Xc), float(Yc)


def liquid_Y_interval(X: float, p: ShapeParams) -> tuple[float, float] | None:
    """Roots in Y of xi(X, .) = 0, i.e. the liquid slice of a column."""
    aXX, aXY, aYY, bX, bY, c0 = conic_coeffs(p)
    qa = aYY
    qb = aXY * X + bY
    qc = aXX * X * X + bX * X + c0
    disc = qb * qb - 4.0 * qa * qc
    if disc <= 0.0:
        return None
    r = math.sqrt(disc)
    y1 = (-qb - r) / (2.0 * qa)
    y2 = (-qb + r) / (2.0 * qa)
    return (min(y1, y2), max(y1, y2))


# ---------------------------------------------------------------------------
# slope and phase


def solve_v(point: tuple[float, float], p: ShapeParams) -> complex:
    X, Y = p.XY(*point)
    xi, eta, zeta = xi_eta_zeta(X, Y, p)
    if abs(zeta) < 1e-14:
        raise ShapeError(f"degenerate zeta at {point}")
    root = complex(0.0, math.sqrt(-xi)) if xi < 0.0 else complex(math.sqrt(xi), 0.0)
    return (eta + root) / zeta


def _f_of_v(v: complex, x: float, y: float, p: ShapeParams) -> complex:
    """Complex slope from v, using q^t = 1 - T E with T = -[-t]:
    f = (q^u - q^y)/(q^u - q^{y-x}) with q^{-u} = 1 + v E reduces to the
    q-stable expression below (the common factor E/(1 + vE) cancels)."""
    E = p.E
    Y = -bracket(-y, p.q)
    T = -bracket(x - y, p.q)
    return (Y - v * (1.0 - Y * E)) / (T - v * (1.0 - T * E))


def _f0_of_v(v: complex, p: ShapeParams) -> complex:
    A, B, C = p.A, p.B, p.C
    return v * (v - B - C) / ((v + A) * (v - B))


@lru_cache(maxsize=None)
def tangency_points(p: ShapeParams) -> dict:
    """The unique tangency point of the conic on each hexagon side.

    Along a side xi >= 0 with a double root, so the root is located as the
    simple zero of the directional derivative of xi, which is available in
    closed form.  The SW side also has the independent closed form
    e^{q x} = (e^{qa} - 1)(e^{-qb} - 1)/(e^{-q(b+c)} - 1) + 1 checked in
    the tests.
    """
    segs = _side_segments(p)
    out = {}
    for s, ((x0, y0), (x1, y1)) in segs.items():
        def dxi(t, x0=x0, y0=y0, x1=x1, y1=y1):
            x = x0 + t * (x1 - x0)
            y = y0 + t * (y1 - y0)
            X, Y = p.XY(x, y)
            gX, gY = xi_grad_XY(X, Y, p)
            return gX * p.dXdx(x) * (x1 - x0) + gY * p.dXdx(y) * (y1 - y0)

        lo, hi = 1e-12, 1.0 - 1e-12
        if dxi(lo) * dxi(hi) > 0:
            raise ShapeError(f"no tangency bracket on side {s} (parameters too large?)")
        t = optimize.brentq(dxi, lo, hi, xtol=1e-15, rtol=8.9e-16)
        out[s] = (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
    return out


def tangency_sw_closed_form(p: ShapeParams) -> float:
    """x-coordinate of the SW-side tangency from the closed form."""
    q = p.q
    if abs(q) < 1e-6:
        # X = AB/(B+C) exactly in tilted coordinates
        return p.x_of_X(p.A * p.B / (p.B + p.C))
    val = math.expm1(q * p.a) * math.expm1(-q * p.b) / math.expm1(-q * (p.b + p.c))
    return math.log1p(val) / q


@lru_cache(maxsize=None)
def _tangency_angles(p: ShapeParams):
    Xc, Yc = conic_center_XY(p)
    tps = tangency_points(p)
    out = []
    for s in SIDES:
        x, y = tps[s]
        X, Y = p.XY(x, y)
        out.append(math.atan2(Y - Yc, X - Xc))
    return out


def classify(point: tuple[float, float], p: ShapeParams) -> str:
    """Phase of a point: liquid, boundary (on the conic), or frozen corner.

    Frozen components are labelled geometrically: the six tangency points
    cut the plane around the conic centre into sectors, one per corner of
    the hexagon.
    """
    x, y = point
    if not p.in_hexagon(x, y):
        raise ShapeError(f"point {point} outside hexagon")
    X, Y = p.XY(x, y)
    xi = xi_eta_zeta(X, Y, p)[0]
    if xi < -_XI_TOL:
        return LIQUID
    if xi <= _XI_TOL:
        return BOUNDARY
    Xc, Yc = conic_center_XY(p)
    ang = math.atan2(Y - Yc, X - Xc)
    tang = _tangency_angles(p)
    # corner i lies between the tangency of side i-1 and side i
    for i in range(6):
        lo = tang[i - 1]
        hi = tang[i]
        span = (hi - lo) % (2.0 * math.pi)
        off = (ang - lo) % (2.0 * math.pi)
        if off <= span:
            return _CORNERS_CCW[i]
    return _CORNERS_CCW[0]  # unreachable


@dataclass(frozen=True)
class SlopeInfo:
    point: tuple[float, float]
    v: complex
    f: complex
    phase: str
    grad: tuple[float, float]
    xi: float


def complex_slope(point: tuple[float, float], p: ShapeParams) -> SlopeInfo:
    phase = classify(point, p)
    v = solve_v(point, p)
    f = _f_of_v(v, point[0], point[1], p)
    xi = xi_xy(*point, p)
    if phase == LIQUID:
        grad = (cmath.phase(f - 1.0) / math.pi - 1.0, 1.0 - cmath.phase(f) / math.pi)
    elif phase == BOUNDARY:
        # approach from the liquid side is not well defined on the conic;
        # report the limiting real-slope values via the frozen sectors of
        # an infinitesimally shifted point
        grad = (cmath.phase(f - 1.0) / math.pi - 1.0, 1.0 - cmath.phase(f) / math.pi)
    else:
        grad = frozen_gradient(phase)
    return SlopeInfo(point, v, f, phase, grad, xi)


def grad_height(point: tuple[float, float], p: ShapeParams) -> tuple[float, float]:
    return complex_slope(point, p).grad


# ---------------------------------------------------------------------------
# heights by column integration


def _dy_slope(x: float, y: float, p: ShapeParams) -> float:
    X, Y = p.XY(x, y)
    xi, eta, zeta = xi_eta_zeta(X, Y, p)
    if xi >= 0.0:
        # at the column endpoints the slope degenerates to its frozen value
        v = (eta + math.sqrt(max(xi, 0.0))) / zeta
        f = _f_of_v(complex(v, 0.0), x, y, p)
        return 1.0 if f.real > 0 else 0.0
    v = (eta + complex(0.0, math.sqrt(-xi))) / zeta
    f = _f_of_v(v, x, y, p)
    return 1.0 - cmath.phase(f) / math.pi


@dataclass(frozen=True)
class Column:
    """Liquid slice of the vertical line at abscissa x, with the affine
    anchor value at the liquid entry point."""

    x: float
    y_bot: float
    y_top: float
    y_lo: float | None  # liquid entry (None: column fully frozen)
    y_hi: float | None
    base_component: str
    top_component: str

    def liquid(self) -> bool:
        return self.y_lo is not None


@lru_cache(maxsize=4096)
def column(x: float, p: ShapeParams) -> Column:
    a, b, c = p.a, p.b, p.c
    y_bot = max(0.0, x - a)
    y_top = min(b + c, x + b)
    X = p.XY(x, 0.0)[0]
    iv = liquid_Y_interval(X, p)
    y_lo = y_hi = None
    if iv is not None:
        yl = p.x_of_X(iv[0])  # the y-map equals the x-map
        yh = p.x_of_X(iv[1])
        if yl < y_top and yh > y_bot:
            y_lo, y_hi = max(yl, y_bot), min(yh, y_top)
    if y_lo is None:
        comp = _nearest_frozen((x, 0.5 * (y_bot + y_top)), p)
        return Column(x, y_bot, y_top, None, None, comp, comp)
    base = _nearest_frozen((x, 0.5 * (y_bot + y_lo)), p)
    top = _nearest_frozen((x, 0.5 * (y_hi + y_top)), p)
    return Column(x, y_bot, y_top, y_lo, y_hi, base, top)


def _nearest_frozen(point, p):
    ph = classify(point, p)
    if ph in FROZEN:
        return ph
    # fall back to the sector of the point even if marginally liquid
    Xc, Yc = conic_center_XY(p)
    X, Y = p.XY(*point)
    ang = math.atan2(Y - Yc, X - Xc)
    tang = _tangency_angles(p)
    for i in range(6):
        lo, hi = tang[i - 1], tang[i]
        span = (hi - lo) % (2.0 * math.pi)
        off = (ang - lo) % (2.0 * math.pi)
        if off <= span:
            return _CORNERS_CCW[i]
    return _CORNERS_CCW[0]


def height(point: tuple[float, float], p: ShapeParams, epsabs: float = 1e-10) -> float:
    """The limit-shape value, by quadrature of the vertical slope.

    Frozen stretches of the column contribute their exact affine values, so
    the integral only runs over the liquid slice below the point.
    """
    x, y = point
    if not p.in_hexagon(x, y):
        raise ShapeError(f"point {point} outside hexagon")
    col = column(x, p)
    if not col.liquid() or y <= col.y_lo:
        comp = col.base_component
        if not col.liquid():
            return frozen_affine(comp, x, y, p)
        return frozen_affine(comp, x, y, p)
    anchor = frozen_affine(col.base_component, x, col.y_lo, p)
    y_stop = min(y, col.y_hi)
    val, err = integrate.quad(
        lambda t: _dy_slope(x, t, p), col.y_lo, y_stop,
        epsabs=epsabs * 0.5, epsrel=1e-11, limit=200,
    )
    if err > max(epsabs, 1e-8):
        raise ShapeError(f"quadrature failed at {point}: error estimate {err}")
    out = anchor + val
    if y > col.y_hi:
        out += frozen_affine(col.top_component, x, y, p) - frozen_affine(
            col.top_component, x, col.y_hi, p
        )
    return out


def monotone_in_q_check(point, q: float, qp: float, abc=(1.0, 1.0, 1.0), tol: float = 1e-8):
    if q < qp:
        raise ShapeError("need q >= q'")
    a, b, c = abc
    hq = height(point, ShapeParams(q, a, b, c))
    hqp = height(point, ShapeParams(qp, a, b, c))
    if hq < hqp - tol:
        raise ShapeError(f"monotonicity violated at {point}: {hq} < {hqp}")
    return hq, hqp


# ---------------------------------------------------------------------------
# level lines


def liquid_X_interval(Y: float, p: ShapeParams) -> tuple[float, float] | None:
    """Roots in X of xi(., Y) = 0, the liquid slice of a horizontal line."""
    aXX, aXY, aYY, bX, bY, c0 = conic_coeffs(p)
    qb = aXY * Y + bX
    qc = aYY * Y * Y + bY * Y + c0
    disc = qb * qb - 4.0 * aXX * qc
    if disc <= 0.0:
        return None
    r = math.sqrt(disc)
    x1 = (-qb - r) / (2.0 * aXX)
    x2 = (-qb + r) / (2.0 * aXX)
    return (min(x1, x2), max(x1, x2))


def left_frozen_abscissa(h: float, p: ShapeParams) -> float:
    """The abscissa where the level-h line leaves the left frozen region,
    i.e. the left crossing of the conic by the horizontal line y = h."""
    if h < 0 or h > p.b:
        raise ShapeError(f"level {h} out of [0, {p.b}]")
    if h == 0.0:
        return tangency_points(p)["SW"][0]
    if h == p.b:
        return tangency_points(p)["NW"][0]
    Y = p.XY(0.0, h)[1]
    iv = liquid_X_interval(Y, p)
    if iv is None:
        raise ShapeError(f"horizontal line y={h} misses the liquid region")
    return p.x_of_X(iv[0])


def level_line_U(h: float, x: float, p: ShapeParams, ytol: float = 1e-10) -> float:
    """The ordinate of the level-h line of the limit shape at abscissa x.

    For 0 < h < b the equation H(x, y) = h has a unique root; at h = 0 the
    supremum of the zero set is returned and at h = b the infimum of the
    b-set, matching the boundary conventions of the analytic level lines.
    """
    if h < 0 or h > p.b:
        raise ShapeError(f"level {h} out of [0, {p.b}]")
    col = column(x, p)
    lo, hi = col.y_bot, col.y_top
    if h == 0.0:
        pred = lambda y: height((x, y), p) > 0.0
    elif h == p.b:
        pred = lambda y: height((x, y), p) >= p.b
    else:
        pred = lambda y: height((x, y), p) >= h
    if pred(lo):
        return lo
    if not pred(hi):
        return hi
    while hi - lo > ytol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# arctic boundary geometry, distances, annuli


@lru_cache(maxsize=None)
def arctic_polyline(p: ShapeParams, n: int = 720) -> np.ndarray:
    """Dense (n, 2) polyline of the conic in (x, y) coordinates."""
    Xc, Yc = conic_center_XY(p)
    aXX, aXY, aYY, bX, bY, c0 = conic_coeffs(p)
    pts = []
    for th in np.linspace(0.0, 2.0 * math.pi, n, endpoint=False):
        ct, st = math.cos(th), math.sin(th)
        # xi(Xc + r ct, Yc + r st) = 0: quadratic in r with no linear term
        qa = aXX * ct * ct + aXY * ct * st + aYY * st * st
        qc = (
            aXX * Xc * Xc + aXY * Xc * Yc + aYY * Yc * Yc + bX * Xc + bY * Yc + c0
        )
        r2 = -qc / qa
        if r2 <= 0:
            continue
        r = math.sqrt(r2)
        pts.append((p.x_of_X(Xc + r * ct), p.x_of_X(Yc + r * st)))
    out = np.array(pts)
    out.setflags(write=False)
    return out


def nearest_arctic_point(point, p: ShapeParams) -> tuple[np.ndarray, float]:
    """Closest point of the conic and the Euclidean distance to it."""
    z = np.asarray(point, dtype=float)
    poly = arctic_polyline(p)
    d2 = ((poly - z) ** 2).sum(axis=1)
    i = int(np.argmin(d2))
    n = len(poly)

    # refine on the arc through the three nearest samples
    Xc, Yc = conic_center_XY(p)
    X, Y = p.XY(*poly[i])
    th0 = math.atan2(Y - Yc, X - Xc)
    dth = 2.0 * math.pi / n

    def dist_at(th):
        q = _conic_point_at_angle(th, p)
        return math.hypot(q[0] - z[0], q[1] - z[1])

    res = optimize.minimize_scalar(
        dist_at, bounds=(th0 - 1.5 * dth, th0 + 1.5 * dth), method="bounded",
        options={"xatol": 1e-13},
    )
    best = _conic_point_at_angle(float(res.x), p)
    return np.array(best), float(res.fun)


def _conic_point_at_angle(th: float, p: ShapeParams):
    Xc, Yc = conic_center_XY(p)
    aXX, aXY, aYY, bX, bY, c0 = conic_coeffs(p)
    ct, st = math.cos(th), math.sin(th)
    qa = aXX * ct * ct + aXY * ct * st + aYY * st * st
    qc = aXX * Xc * Xc + aXY * Xc * Yc + aYY * Yc * Yc + bX * Xc + bY * Yc + c0
    r = math.sqrt(max(-qc / qa, 0.0))
    return (p.x_of_X(Xc + r * ct), p.x_of_X(Yc + r * st))


def nearest_side(point, p: ShapeParams) -> tuple[str, float]:
    """Closest hexagon side and the Euclidean distance to it."""
    x, y = point
    best, dist = None, math.inf
    for s, ((x0, y0), (x1, y1)) in _side_segments(p).items():
        dx, dy = x1 - x0, y1 - y0
        t = ((x - x0) * dx + (y - y0) * dy) / (dx * dx + dy * dy)
        t = min(1.0, max(0.0, t))
        dd = math.hypot(x - (x0 + t * dx), y - (y0 + t * dy))
        if dd < dist:
            best, dist = s, dd
    return best, dist


@dataclass(frozen=True)
class EdgeCoords:
    point: tuple[float, float]
    side: str
    d_frak: float  # sqrt(distance to the nearest hexagon side)
    e_frak: float  # sideways distance to the conic along v (0 outside liquid)
    d_tt: float  # max(d_frak, N^{-1/2})
    e_tt: float  # max(e_frak, d_tt^{-1/3} N^{-2/3})
    v: tuple[float, float]
    w: tuple[float, float]
    u: tuple[float, float]
    dist_w: float  # Euclidean distance to the nearest conic point


def edge_coords(point, p: ShapeParams, N: int) -> EdgeCoords:
    x, y = point
    side, side_dist = nearest_side(point, p)
    d_frak = math.sqrt(side_dist)
    vx, vy = _SIDE_V[side]
    nv = math.hypot(vx, vy)
    vxu, vyu = vx / nv, vy / nv

    X, Y = p.XY(x, y)
    xi0 = xi_eta_zeta(X, Y, p)[0]
    e_frak = 0.0
    if xi0 < 0.0:
        ts = _line_crossings(point, (int(vx), int(vy)), p)
        e_frak = min(abs(t) for t in ts) if ts else 0.0
    d_tt = max(d_frak, N ** -0.5)
    e_tt = max(e_frak, d_tt ** (-1.0 / 3.0) * N ** (-2.0 / 3.0))

    target, dist_w = nearest_arctic_point(point, p)
    if dist_w > 1e-14:
        wx, wy = (target[0] - x) / dist_w, (target[1] - y) / dist_w
    else:
        wx, wy = 0.0, 0.0
    # anticlockwise tangent: outward normal rotated by +90 degrees
    ux, uy = -wy, wx
    return EdgeCoords(
        (x, y), side, d_frak, e_frak, d_tt, e_tt, (vxu, vyu), (wx, wy), (ux, uy), dist_w
    )


def _line_crossings(point, d, p: ShapeParams) -> list[float]:
    """Signed Euclidean distances from a point to the conic along the line
    with direction d in {(+-1,0), (0,+-1), (+-1,+-1)}.

    Along these lines xi is a quadratic polynomial (in the line parameter
    at q = 0, in its exponential e^{q tau} otherwise), so the crossings
    are closed form.
    """
    x, y = point
    dx, dy = abs(d[0]), abs(d[1])
    scale = math.hypot(dx, dy)
    q = p.q
    aXX, aXY, aYY, bX, bY, c0 = conic_coeffs(p)
    if abs(q) < 1e-6:
        # X = x + tau*dx, Y = y + tau*dy up to O(q) handled by the maps;
        # use two generic points to build the quadratic in tau exactly
        X0, Y0 = p.XY(x, y)
        dX, dY = p.dXdx(x) * dx, p.dXdx(y) * dy
        # for |q| < 1e-6 the maps are affine to within 1e-12 over the
        # hexagon span, which is far below the root tolerance used here
        a2 = aXX * dX * dX + aXY * dX * dY + aYY * dY * dY
        a1 = (2 * aXX * X0 + aXY * Y0 + bX) * dX + (2 * aYY * Y0 + aXY * X0 + bY) * dY
        a0 = aXX * X0 * X0 + aXY * X0 * Y0 + aYY * Y0 * Y0 + bX * X0 + bY * Y0 + c0
        disc = a1 * a1 - 4 * a2 * a0
        if disc < 0:
            return []
        r = math.sqrt(disc)
        taus = [(-a1 - r) / (2 * a2), (-a1 + r) / (2 * a2)]
        return [t * scale for t in taus]
    # q != 0: with s = e^{q tau}, X(x + tau dx) = Ps + R is linear in s
    E = p.E
    R = 1.0 / E
    out = []
    if dx and dy:
        P = -math.exp(q * x) / E
        Q = -math.exp(q * y) / E
        a2 = aXX * P * P + aXY * P * Q + aYY * Q * Q
        a1 = (2 * aXX * P + aXY * Q) * R + (2 * aYY * Q + aXY * P) * R + bX * P + bY * Q
        a0 = (aXX + aXY + aYY) * R * R + (bX + bY) * R + c0
        disc = a1 * a1 - 4 * a2 * a0
        if disc < 0:
            return []
        r = math.sqrt(disc)
        for s in ((-a1 - r) / (2 * a2), (-a1 + r) / (2 * a2)):
            if s > 0:
                out.append(math.log(s) / q * scale)
        return out
    if dx:
        Y0 = p.XY(x, y)[1]
        iv = liquid_X_interval(Y0, p)
        if iv is None:
            return []
        return [(p.x_of_X(X) - x) * 1.0 for X in iv]
    X0 = p.XY(x, y)[0]
    iv = liquid_Y_interval(X0, p)
    if iv is None:
        return []
    return [(p.x_of_X(Y) - y) * 1.0 for Y in iv]


@dataclass(frozen=True)
class AnnulusInfo:
    ell: int
    in_A: bool
    in_B: bool
    in_Au: bool
    de: float


def annulus_index(point, p: ShapeParams, N: int, u: float) -> AnnulusInfo:
    ec = edge_coords(point, p, N)
    de = ec.d_tt * ec.e_tt
    ell = math.ceil(-math.log(de, 4.0))
    in_A = 4.0 ** (-ell) <= de <= 4.0 ** (1 - ell)
    in_B = 4.0 ** (0.5 - ell) <= de <= 4.0 ** (1 - ell)
    in_Au = math.sqrt(ec.d_tt) * ec.e_tt ** 1.5 >= u / N
    return AnnulusInfo(ell, in_A, in_B, in_Au, de)


def ell0(q: float, N: int, a_delta: float = 0.0) -> int:
    lower = 2.0 ** (-21) * q ** (2.0 / 3.0) * N ** (2.0 / 3.0 - a_delta)
    l0 = math.ceil(math.log(lower, 4.0) - 1e-12)
    assert lower <= 4.0 ** l0 < 4.0 * lower
    return l0


def augmented_liquid(point, p: ShapeParams, N: int, delta: float) -> bool:
    X, Y = p.XY(*point)
    if xi_eta_zeta(X, Y, p)[0] < 0.0:
        return True
    _, dist = nearest_arctic_point(point, p)
    _, side_dist = nearest_side(point, p)
    d_frak = math.sqrt(side_dist)
    return dist <= d_frak ** (2.0 / 3.0) * N ** (delta - 2.0 / 3.0)


def rescaled_height(center, p: ShapeParams, N: int, zhat) -> float:
    ec = edge_coords(center, p, N)
    if ec.e_frak <= 0:
        raise ShapeError("rescaled height requires a liquid centre")
    s = math.sqrt(ec.d_frak * ec.e_frak)
    xh, yh = zhat
    x = center[0] + s * ec.u[0] * xh + ec.d_frak * ec.e_frak * ec.w[0] * yh
    y = center[1] + s * ec.u[1] * xh + ec.d_frak * ec.e_frak * ec.w[1] * yh
    if not p.in_hexagon(x, y):
        raise ShapeError("rescaled argument leaves the hexagon")
    return ec.d_frak ** -0.5 * ec.e_frak ** -1.5 * height((x, y), p)


# ---------------------------------------------------------------------------
# untilted closed-form oracle for the lower arctic arc


def q0_ellipse_oracle(a: float, b: float, c: float):
    """Closed-form parametrization (x(s), gamma(s)) of the lower-left
    arctic arc at q = 0; s runs over [0, s_max]."""

    def f0(u):
        return u * (u - b - c) / ((u + a) * (u - b))

    def f0p(u):
        num = u * (u - b - c)
        den = (u + a) * (u - b)
        dnum = 2.0 * u - b - c
        dden = 2.0 * u + a - b
        return (dnum * den - num * dden) / (den * den)

    def point(s):
        fs, fps = f0(s), f0p(s)
        x = (fs - 1.0) ** 2 / fps
        gamma = s + fs * (fs - 1.0) / fps
        return x, gamma

    return point


def edge_scaling_check(p: ShapeParams, x0: float, npts: int = 12,
                       t_lo: float = 1e-4, t_hi: float = 1e-2) -> dict:
    """Log-log slopes of the height and vertical slope against the
    sideways distance, along a vertical transect approaching the lower
    arctic arc at abscissa x0 (taken right of the SW tangency, so the
    frozen value below the arc is 0)."""
    col = column(x0, p)
    if not col.liquid():
        raise ShapeError("transect abscissa is outside the liquid shadow")
    y0 = col.y_lo
    N = 10 ** 9  # only enters the clipped coordinates, irrelevant here
    ts = np.geomspace(t_lo, t_hi, npts)
    rows = []
    for t in ts:
        z = (x0, y0 + t)
        ec = edge_coords(z, p, N)
        H = height(z, p)
        dy = _dy_slope(x0, y0 + t, p)
        rows.append((t, ec.d_frak, ec.e_frak, H, dy))
    rows = np.array(rows)
    loge = np.log(rows[:, 2])
    slope_H = np.polyfit(loge, np.log(rows[:, 3]), 1)[0]
    slope_dy = np.polyfit(loge, np.log(rows[:, 4]), 1)[0]
    pref_H = rows[:, 3] / (rows[:, 1] ** 0.5 * rows[:, 2] ** 1.5)
    pref_dy = rows[:, 4] / (rows[:, 2] / rows[:, 1]) ** 0.5
    return {
        "x0": x0,
        "slope_height_vs_e": float(slope_H),
        "slope_dyH_vs_e": float(slope_dy),
        "prefactor_height_ratio": float(pref_H.max() / pref_H.min()),
        "prefactor_dyH_ratio": float(pref_dy.max() / pref_dy.min()),
        "d_range": (float(rows[:, 1].min()), float(rows[:, 1].max())),
    }


def boundary_shift_check(q: float, qp: float, y: float = 0.0,
                         abc=(1.0, 1.0, 1.0)) -> float:
    """Horizontal displacement between the q- and q'-arctic boundaries at
    ordinate y (left arcs); positive for q > q'."""
    a, b, c = abc
    pq = ShapeParams(q, a, b, c)
    pqp = ShapeParams(qp, a, b, c)
    if y == 0.0:
        return tangency_points(pq)["SW"][0] - tangency_points(pqp)["SW"][0]
    return left_frozen_abscissa(y, pq) - left_frozen_abscissa(y, pqp)
