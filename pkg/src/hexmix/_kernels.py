"""Event-application kernels for the Glauber dynamics.

These are the hot loops: applying millions of (site, coin) events to one
height array or to a coupled (bottom, top) pair.  They are compiled with
numba when available; setting the environment variable ``HEXMIX_NO_NUMBA``
(or failing to import numba) selects a pure-Python fallback with identical
semantics, used by the test suite to cross-check the compiled path.

All arrays are 2-D int64 height grids; ``xs``/``ys`` list the active sites
and ``floor``/``ceil`` are full-grid clipping fields (extreme tilings when
no constraint is requested, so the kernels never branch on "no floor").
"""

from __future__ import annotations

import os

import numpy as np

try:
    if os.environ.get("HEXMIX_NO_NUMBA"):
        raise ImportError("numba disabled by HEXMIX_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


_jit = njit(cache=True, nogil=True)


@_jit
def _bounds(h, x, y, floor, ceil):
    """Extreme admissible values at interior site (x, y); differ by <= 1."""
    lo = h[x + 1, y]
    if h[x, y - 1] > lo:
        lo = h[x, y - 1]
    v = h[x - 1, y] - 1
    if v > lo:
        lo = v
    v = h[x, y + 1] - 1
    if v > lo:
        lo = v
    v = h[x + 1, y + 1] - 1
    if v > lo:
        lo = v
    if h[x - 1, y - 1] > lo:
        lo = h[x - 1, y - 1]
    if floor[x, y] > lo:
        lo = floor[x, y]

    hi = h[x - 1, y]
    if h[x, y + 1] < hi:
        hi = h[x, y + 1]
    v = h[x + 1, y] + 1
    if v < hi:
        hi = v
    v = h[x, y - 1] + 1
    if v < hi:
        hi = v
    if h[x + 1, y + 1] < hi:
        hi = h[x + 1, y + 1]
    v = h[x - 1, y - 1] + 1
    if v < hi:
        hi = v
    if ceil[x, y] < hi:
        hi = ceil[x, y]
    return lo, hi


@_jit
def apply_events_single(h, xs, ys, sites, coins, p_up, floor, ceil):
    """Apply a batch of heat-bath events to one chain, in place."""
    for i in range(sites.shape[0]):
        k = sites[i]
        x = xs[k]
        y = ys[k]
        lo, hi = _bounds(h, x, y, floor, ceil)
        if hi > lo:
            if coins[i] < p_up:
                h[x, y] = hi
            else:
                h[x, y] = lo


@_jit
def apply_events_pair(bot, top, xs, ys, sites, coins, p_up, floor, ceil, diff):
    """Apply one batch to the coupled (bottom, top) pair, in place.

    ``diff`` is the current value of sum(top - bot); returns the updated
    diff and the in-batch index of the first event after which the chains
    coalesce (-1 when they do not in this batch).  Raises on any order
    violation, which the monotone coupling forbids.
    """
    hit = -1
    for i in range(sites.shape[0]):
        k = sites[i]
        x = xs[k]
        y = ys[k]
        up = coins[i] < p_up

        lo, hi = _bounds(bot, x, y, floor, ceil)
        if hi > lo:
            nv = hi if up else lo
            diff += bot[x, y] - nv
            bot[x, y] = nv
        lo, hi = _bounds(top, x, y, floor, ceil)
        if hi > lo:
            nv = hi if up else lo
            diff += nv - top[x, y]
            top[x, y] = nv

        if top[x, y] < bot[x, y]:
            raise RuntimeError("monotone coupling violated")
        if diff == 0 and hit < 0:
            hit = i
    return diff, hit
