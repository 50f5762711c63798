"""Acceptance battery: one check per release criterion, each printing a
single pass/fail line.  Run with ``pytest -v -s tests/test_acceptance.py``."""

import math
import time

import numpy as np

from hexmix import limitshape as ls
from hexmix.dynamics import ChainConfig, cftp_sample, heat_bath_update
from hexmix.experiments import (
    coalescence_scaling,
    concentration_experiment,
    draw_cftp_samples,
    empirical_tv_check,
    level_line_concentration,
    tilted_volume_experiment,
    uniformity_test,
)
from hexmix.hexlattice import (
    HexDomain,
    count_tilings_macmahon,
    count_tilings_paths,
    enumerate_all,
)
from hexmix.rng import replica_seed
from hexmix.spectrum import (
    detailed_balance_residual,
    exact_spectrum,
    stationarity_residual,
    tmix_exact,
)

SEED = 20260823


def _report(num: int, desc: str, ok: bool, t0: float):
    line = f"criterion {num:02d} [{'PASS' if ok else 'FAIL'}] ({time.time() - t0:6.1f}s): {desc}"
    print("\n" + line)
    assert ok, line


def test_criterion_01_enumeration_oracles():
    t0 = time.time()
    ok = True
    for abc, want in [((1, 1, 1), 2), ((2, 1, 1), 3), ((2, 2, 2), 20)]:
        ok &= count_tilings_macmahon(*abc) == want
        ok &= count_tilings_paths(*abc) == want
        ok &= len(enumerate_all(HexDomain(*abc))) == want
    _report(1, "tiling counts 2/3/20 agree across independent counters", ok, t0)


def test_criterion_02_exact_mixing_111():
    t0 = time.time()
    spec = exact_spectrum(HexDomain(1, 1, 1), 0.0)
    tm = tmix_exact(spec, 0.25)
    ok = abs(spec.gap - 2.0) < 1e-10
    ok &= abs(tm - math.log(2.0) / 2.0) < 0.01 * (math.log(2.0) / 2.0)
    _report(2, f"(1,1,1): gap={spec.gap:.6f}, tmix(1/4)={tm:.6f} vs ln2/2", ok, t0)


def test_criterion_03_stationarity_residuals_222():
    t0 = time.time()
    r0 = stationarity_residual(exact_spectrum(HexDomain(2, 2, 2), 0.0))
    s1 = exact_spectrum(HexDomain(2, 2, 2), 1.0)
    r1 = max(stationarity_residual(s1), detailed_balance_residual(s1))
    ok = r0 < 1e-12 and r1 < 1e-12
    _report(3, f"(2,2,2) generator residuals {r0:.1e} (q=0), {r1:.1e} (q=1)", ok, t0)


def test_criterion_04_cftp_exactness_with_negative_control():
    t0 = time.time()
    d = HexDomain(2, 2, 2)
    samples = draw_cftp_samples(d, 100_000, SEED)
    p_good = uniformity_test(samples, d)
    biased = [
        cftp_sample(ChainConfig(domain=d, q=0.5, seed=replica_seed(SEED + 1, i)))
        for i in range(5000)
    ]
    p_bad = uniformity_test(biased, d)
    ok = p_good > 1e-3 and p_bad < 1e-6
    _report(4, f"chi2 p={p_good:.3g} on 1e5 samples; negative control p={p_bad:.2g}", ok, t0)


def test_criterion_05_monotone_coupling_exhaustive():
    t0 = time.time()
    d = HexDomain(2, 2, 2)
    cfg = ChainConfig(domain=d, q=0.0)
    states = enumerate_all(d)
    sites = d.interior_vertices()
    events = violations = 0
    for f in states:
        for g in states:
            if not f <= g:
                continue
            bot, top = f, g
            for _ in range(5):
                for z in sites:
                    for u in (0.25, 0.75):
                        bot = heat_bath_update(bot, z, u, cfg)
                        top = heat_bath_update(top, z, u, cfg)
                        events += 1
                        if not bot <= top:
                            violations += 1
    ok = events >= 10_000 and violations == 0
    _report(5, f"order preserved at all {events} events over comparable pairs", ok, t0)


def test_criterion_06_arctic_conic():
    t0 = time.time()
    p0 = ls.ShapeParams(0.0)
    pts = ls.arctic_polyline(p0)
    res = max(
        abs((X + Y - 2.0) ** 2 + 3.0 * (X - Y) ** 2 - 3.0)
        for X, Y in (p0.XY(x, y) for x, y in pts[:: max(1, len(pts) // 100)])
    )
    sw = ls.tangency_points(p0)["SW"][0]
    p1 = ls.ShapeParams(0.1)
    gap = abs(ls.tangency_points(p1)["SW"][0] - ls.tangency_sw_closed_form(p1))
    ok = res < 1e-9 and abs(sw - 0.5) < 1e-12 and gap < 1e-10
    _report(6, f"conic residual {res:.1e}; x_SW={sw}; closed-form gap {gap:.1e}", ok, t0)


def test_criterion_07_shape_center_values():
    t0 = time.time()
    p0 = ls.ShapeParams(0.0)
    H = ls.height((1.0, 1.0), p0)
    gx, gy = ls.grad_height((1.0, 1.0), p0)
    ok = abs(H - 0.5) < 1e-8 and abs(gx + 1.0 / 3.0) < 1e-6 and abs(gy - 2.0 / 3.0) < 1e-6
    _report(7, f"H(1,1)={H:.10f}, grad=({gx:.8f},{gy:.8f})", ok, t0)


def test_criterion_08_edge_scaling_exponents():
    t0 = time.time()
    ok = True
    msgs = []
    for q in (0.0, 0.1):
        rep = ls.edge_scaling_check(ls.ShapeParams(q), 0.8)
        sH, sdy = rep["slope_height_vs_e"], rep["slope_dyH_vs_e"]
        ok &= abs(sH - 1.5) < 0.05 and abs(sdy - 0.5) < 0.05
        msgs.append(f"q={q}: {sH:.3f}/{sdy:.3f}")
    _report(8, "edge exponents (H, dyH vs e) " + "; ".join(msgs), ok, t0)


def test_criterion_09_q_monotonicity_band():
    t0 = time.time()
    p0 = ls.ShapeParams(0.0)
    p1 = ls.ShapeParams(0.1)
    pts = []
    for x in np.linspace(0.35, 1.65, 20):
        for y in np.linspace(0.35, 1.65, 20):
            if p0.in_hexagon(x, y) and ls.xi_xy(x, y, p0) < -5e-2:
                pts.append((float(x), float(y)))
            if len(pts) >= 200:
                break
        if len(pts) >= 200:
            break
    assert len(pts) >= 200
    ratios = []
    mono_ok = True
    for z in pts:
        h1, h0 = ls.height(z, p1), ls.height(z, p0)
        if h1 < h0 - 1e-8:
            mono_ok = False
        ec = ls.edge_coords(z, p0, 10 ** 9)
        ratios.append((h1 - h0) / (math.sqrt(ec.d_frak * ec.e_frak) * 0.1))
    band = max(ratios) / min(ratios)
    ok = mono_ok and band < 10.0
    _report(9, f"H_q >= H_0 on {len(pts)} points; ratio band factor {band:.2f}", ok, t0)


def test_criterion_10_concentration(samples_n16, samples_n32):
    t0 = time.time()
    rep = concentration_experiment(
        [16, 32], replicas=100, delta=0.3, seed=SEED,
        samples_by_n={16: samples_n16, 32: samples_n32},
    )
    meds = rep.stats["median_sup_error"]
    frozen = rep.stats["frozen_exact_fraction"]["32"]
    ok = meds["32"] < meds["16"] and frozen >= 0.95
    _report(
        10,
        f"median sup err {meds['16']:.4f} -> {meds['32']:.4f}; frozen-exact {frozen:.0%}",
        ok, t0,
    )


def test_criterion_11_level_line_sandwich(samples_n16, samples_n32):
    t0 = time.time()
    rep = level_line_concentration(
        [16, 32], replicas=100, delta=0.4, seed=SEED,
        samples_by_n={16: samples_n16, 32: samples_n32},
    )
    f16 = rep.stats["violation_fraction"]["16"]
    f32 = rep.stats["violation_fraction"]["32"]
    ok = f32 < 0.05 and f32 <= f16
    _report(11, f"violation fraction {f16:.3%} (N=16) -> {f32:.3%} (N=32)", ok, t0)


def test_criterion_12_tilted_volume_monotone():
    t0 = time.time()
    rep = tilted_volume_experiment(8, [-1.0, 0.0, 1.0], replicas=60, seed=SEED)
    ok = rep.passed()
    means = rep.stats["mean_volume"]
    _report(
        12,
        "E[volume] " + " < ".join(f"{means[k]:.1f}" for k in ("-1.0", "0.0", "1.0"))
        + " with disjoint CIs",
        ok, t0,
    )


def test_criterion_13_mixing_scaling_exploration():
    t0 = time.time()
    rep = coalescence_scaling([4, 6, 8, 12, 16], replicas=30, seed=SEED)
    expo = rep.stats["fitted_exponent"]
    lo, hi = rep.stats["exponent_ci95"]
    flagged = rep.stats["flagged_outside_sanity_band"]
    tv = empirical_tv_check(10_000, SEED)
    ok = rep.verdicts["medians_strictly_increasing"] and not flagged and tv.passed()
    _report(
        13,
        f"coalescence exponent {expo:.2f} (CI [{lo:.2f},{hi:.2f}]); "
        f"N=2 empirical TV brackets exact t_mix",
        ok, t0,
    )
