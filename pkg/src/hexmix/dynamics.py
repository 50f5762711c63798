"""Continuous-time single-flip heat-bath dynamics on hexagon tilings.

Each interior site carries an independent Poisson clock of rate 2
(generated by uniformization: one clock of rate 2 x #sites plus a uniform
site choice).  At an event the site height is resampled from its local
conditional law: with the shared uniform coin ``U``, the site moves to its
local maximum when ``U < p_up = e^{q/N}/(e^{q/N}+1)`` and to its local
minimum otherwise, clipped by optional floor/ceiling fields and restricted
to an optional active region.  At q=0 this is the fair-coin rule; in
general it is reversible for the measure proportional to
``exp((q/N) * sum h)``, and the shared coin makes the grand coupling
monotone, which is what coupling-from-the-past needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hexlattice import (
    HexDomain,
    HeightField,
    HexlatticeError,
    extreme_tilings,
    local_bounds,
)
from .rng import EventStream


class DynamicsError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChainConfig:
    domain: HexDomain
    q: float = 0.0
    seed: int = 0
    floor: HeightField | None = None
    ceiling: HeightField | None = None
    active: np.ndarray | None = None  # boolean vertex mask
    nscale: int | None = None  # N in the tilt exponent q/N; default na

    def __post_init__(self):
        if self.floor is not None and self.ceiling is not None:
            if not self.floor <= self.ceiling:
                raise HexlatticeError("floor must lie below ceiling")

    @property
    def n(self) -> int:
        return self.nscale if self.nscale is not None else self.domain.na

    @property
    def p_up(self) -> float:
        # e^{q/N} / (e^{q/N} + 1), written to stay finite for large |q|
        return 1.0 / (1.0 + math.exp(-self.q / self.n))


def _site_arrays(cfg: ChainConfig) -> tuple[np.ndarray, np.ndarray]:
    mask = cfg.domain.interior_mask()
    if cfg.active is not None:
        mask = mask & cfg.active
    xs, ys = np.nonzero(mask)
    return xs.astype(np.int64), ys.astype(np.int64)


def _clip_fields(cfg: ChainConfig) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = extreme_tilings(cfg.domain)
    fl = lo.h.copy() if cfg.floor is None else np.maximum(lo.h, cfg.floor.h)
    ce = hi.h.copy() if cfg.ceiling is None else np.minimum(hi.h, cfg.ceiling.h)
    return np.ascontiguousarray(fl), np.ascontiguousarray(ce)


def _extreme_states(cfg: ChainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Minimal and maximal admissible states inside [floor, ceiling]."""
    fl, ce = _clip_fields(cfg)
    d = cfg.domain
    bot = HeightField(d, np.ascontiguousarray(fl.copy()))
    top = HeightField(d, np.ascontiguousarray(ce.copy()))
    # floor/ceiling are admissible fields themselves, hence valid extremes
    return bot.h.copy(), top.h.copy()


def _check_within(cfg: ChainConfig, f: HeightField):
    if f.domain != cfg.domain:
        raise DynamicsError("initial state lives on a different domain")
    fl, ce = _clip_fields(cfg)
    m = cfg.domain.mask()
    if np.any(f.h[m] < fl[m]) or np.any(f.h[m] > ce[m]):
        raise DynamicsError("initial state violates floor/ceiling constraints")


def heat_bath_update(f: HeightField, z: tuple[int, int], U: float, cfg: ChainConfig) -> HeightField:
    """Single-event update; reference implementation for the kernels."""
    x, y = z
    if not cfg.domain.contains(x, y):
        raise HexlatticeError(f"vertex {z} outside domain")
    if cfg.domain.boundary_height(x, y) is not None:
        return f
    if cfg.active is not None and not cfg.active[x, y]:
        return f
    lo, hi = local_bounds(f, x, y)
    if cfg.floor is not None:
        lo = max(lo, int(cfg.floor.h[x, y]))
    if cfg.ceiling is not None:
        hi = min(hi, int(cfg.ceiling.h[x, y]))
    if hi <= lo:
        return f
    return f.with_value(x, y, hi if U < cfg.p_up else lo)


@dataclass
class Trajectory:
    cfg: ChainConfig
    T: float
    snapshots: list[tuple[float, HeightField]]
    event_count: int

    @property
    def final(self) -> HeightField:
        return self.snapshots[-1][1]

    def metadata(self) -> dict:
        from .gridio import field_digest

        fl, ce = _clip_fields(self.cfg)
        d = self.cfg.domain
        return {
            "sides": f"{d.na} {d.nb} {d.nc}",
            "seed": self.cfg.seed,
            "q": repr(self.cfg.q),
            "nscale": self.cfg.n,
            "constraints": field_digest(HeightField(d, fl)) + "-" + field_digest(HeightField(d, ce)),
            "T": repr(self.T),
            "events": self.event_count,
        }


def run(
    cfg: ChainConfig,
    init: HeightField,
    T: float,
    snapshot_times: list[float] | None = None,
    epoch: int = 0,
) -> Trajectory:
    """Evolve ``init`` for chain time ``T``; snapshots at requested times.

    Snapshots always include t=0 and t=T.  Identical (cfg, init, T) give a
    bit-identical trajectory.
    """
    _check_within(cfg, init)
    xs, ys = _site_arrays(cfg)
    fl, ce = _clip_fields(cfg)
    wanted = sorted(set(snapshot_times or []) - {0.0, T})
    h = init.h.copy()
    snaps = [(0.0, init)]
    nev = 0
    if T > 0 and xs.size:
        stream = EventStream(cfg.seed, epoch, 2.0 * xs.size, xs.size, T)
        for times, sites, coins in stream.chunks():
            start = 0
            while wanted and wanted[0] <= times[-1]:
                cut = int(np.searchsorted(times, wanted[0], side="right"))
                _kernels.apply_events_single(
                    h, xs, ys, sites[start:cut], coins[start:cut], cfg.p_up, fl, ce
                )
                snaps.append((wanted.pop(0), HeightField(cfg.domain, h.copy())))
                start = cut
            _kernels.apply_events_single(
                h, xs, ys, sites[start:], coins[start:], cfg.p_up, fl, ce
            )
            nev += len(times)
    for t in wanted:  # times after the last event
        snaps.append((t, HeightField(cfg.domain, h.copy())))
    snaps.append((T, HeightField(cfg.domain, h.copy())))
    return Trajectory(cfg, T, snaps, nev)


@dataclass
class CouplingRun:
    cfg: ChainConfig
    T: float
    bottom: HeightField
    top: HeightField
    coalescence_time: float | None
    event_count: int

    @property
    def coalesced(self) -> bool:
        return self.coalescence_time is not None


def grand_coupling(cfg: ChainConfig, T: float, epoch: int = 0) -> CouplingRun:
    """Evolve the extreme states under one shared event stream.

    The order invariant bottom <= top is asserted at every event inside the
    kernel; the first time the states meet is reported exactly.
    """
    bot, top = _extreme_states(cfg)
    xs, ys = _site_arrays(cfg)
    fl, ce = _clip_fields(cfg)
    d = cfg.domain
    diff = int((top - bot)[d.mask()].sum())
    nev = 0
    tcoal = 0.0 if diff == 0 else None
    if T > 0 and xs.size:
        stream = EventStream(cfg.seed, epoch, 2.0 * xs.size, xs.size, T)
        for times, sites, coins in stream.chunks():
            nev += len(times)
            if tcoal is None:
                diff, hit = _kernels.apply_events_pair(
                    bot, top, xs, ys, sites, coins, cfg.p_up, fl, ce, diff
                )
                if hit >= 0:
                    tcoal = float(times[hit])
                    # replay the tail of this chunk on the merged chain
                    _kernels.apply_events_single(
                        bot, xs, ys, sites[hit + 1 :], coins[hit + 1 :], cfg.p_up, fl, ce
                    )
                    top = bot.copy()
            else:
                _kernels.apply_events_single(
                    bot, xs, ys, sites, coins, cfg.p_up, fl, ce
                )
                top = bot.copy()
    return CouplingRun(
        cfg, T, HeightField(d, bot), HeightField(d, top), tcoal, nev
    )


def cftp_sample(cfg: ChainConfig, max_epochs: int = 48,
                start_epoch: int | None = None) -> HeightField:
    """Exact sample from the stationary law by coupling from the past.

    Epoch j covers past chain time (-2^j, -2^{j-1}]; the stream of epoch j
    is a fixed function of (seed, j), so doubling further into the past
    reuses exactly the randomness already committed.  The first attempted
    span defaults to the empirical coalescence scale (a few N^2); the
    output law does not depend on this choice, only the work done does.
    Failure to coalesce within ``max_epochs`` doublings raises rather than
    returning a biased sample.
    """
    xs, ys = _site_arrays(cfg)
    fl, ce = _clip_fields(cfg)
    d = cfg.domain
    if xs.size == 0:
        return HeightField(d, np.ascontiguousarray(fl.copy()))
    rate = 2.0 * xs.size
    if start_epoch is None:
        start_epoch = max(0, math.ceil(math.log2(4.0 * cfg.n * cfg.n)))
    for J in range(start_epoch, max_epochs):
        bot, top = _extreme_states(cfg)
        diff = int((top - bot)[d.mask()].sum())
        merged = diff == 0
        for j in range(J, -1, -1):
            Tj = 1.0 if j == 0 else float(2 ** (j - 1))
            stream = EventStream(cfg.seed, j, rate, xs.size, Tj)
            for _, sites, coins in stream.chunks():
                if merged:
                    _kernels.apply_events_single(
                        bot, xs, ys, sites, coins, cfg.p_up, fl, ce
                    )
                else:
                    diff, hit = _kernels.apply_events_pair(
                        bot, top, xs, ys, sites, coins, cfg.p_up, fl, ce, diff
                    )
                    if hit >= 0:
                        merged = True
                        _kernels.apply_events_single(
                            bot, xs, ys, sites[hit + 1 :], coins[hit + 1 :],
                            cfg.p_up, fl, ce,
                        )
        if merged:
            return HeightField(d, np.ascontiguousarray(bot))
    raise DynamicsError(
        f"coupling from the past did not coalesce within 2^{max_epochs - 1} time units"
    )


@dataclass(frozen=True)
class CensorInterval:
    t0: float
    t1: float
    active: np.ndarray | None = None
    floor: HeightField | None = None
    ceiling: HeightField | None = None


@dataclass(frozen=True)
class CensorSchedule:
    intervals: tuple[CensorInterval, ...]

    def __post_init__(self):
        t = 0.0
        for iv in self.intervals:
            if iv.t0 != t or iv.t1 <= iv.t0:
                raise DynamicsError("censor schedule must partition [0, T)")
            t = iv.t1

    @property
    def T(self) -> float:
        return self.intervals[-1].t1


def censored_run(cfg: ChainConfig, sched: CensorSchedule, init: HeightField) -> Trajectory:
    """Run under a piecewise censoring schedule, sharing cfg's event stream.

    Events at sites outside an interval's region are discarded; interval
    floors/ceilings are intersected with the chain's own constraints.  With
    a trivial schedule this reproduces ``run`` event for event.
    """
    _check_within(cfg, init)
    xs, ys = _site_arrays(cfg)
    fl, ce = _clip_fields(cfg)
    d = cfg.domain
    h = init.h.copy()
    nev = 0
    snaps = [(0.0, init)]
    if xs.size:
        stream = EventStream(cfg.seed, 0, 2.0 * xs.size, xs.size, sched.T)
        site_ok = np.ones((len(sched.intervals), xs.size), dtype=bool)
        fls, ces = [], []
        for i, iv in enumerate(sched.intervals):
            if iv.active is not None:
                site_ok[i] = iv.active[xs, ys]
            fls.append(fl if iv.floor is None else np.maximum(fl, iv.floor.h))
            ces.append(ce if iv.ceiling is None else np.minimum(ce, iv.ceiling.h))
        bounds = np.array([iv.t1 for iv in sched.intervals])
        for times, sites, coins in stream.chunks():
            nev += len(times)
            idx = np.searchsorted(bounds, times, side="right")
            for i in range(len(sched.intervals)):
                inI = idx == i
                if not inI.any():
                    continue
                keep = inI & site_ok[i][sites]
                _kernels.apply_events_single(
                    h, xs, ys, sites[keep], coins[keep], cfg.p_up,
                    np.ascontiguousarray(fls[i]), np.ascontiguousarray(ces[i]),
                )
    snaps.append((sched.T, HeightField(d, h)))
    return Trajectory(cfg, sched.T, snaps, nev)


def trivial_schedule(T: float) -> CensorSchedule:
    return CensorSchedule((CensorInterval(0.0, T),))
