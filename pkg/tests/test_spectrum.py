import math

import numpy as np
import pytest

from hexmix.hexlattice import HexDomain, volume
from hexmix.spectrum import (
    SpectrumError,
    detailed_balance_residual,
    exact_spectrum,
    stationarity_residual,
    tmix_exact,
)


def test_two_state_chain_closed_form():
    spec = exact_spectrum(HexDomain(1, 1, 1), 0.0)
    assert len(spec.states) == 2
    # flip rate 2*1/2 = 1 each way: gap 2, TV(t) = e^{-2t}/2
    assert spec.gap == pytest.approx(2.0, abs=1e-12)
    assert tmix_exact(spec, 0.25) == pytest.approx(math.log(2.0) / 2.0, rel=1e-6)
    for t in (0.1, 0.5, 1.0):
        assert spec.worst_tv(t) == pytest.approx(0.5 * math.exp(-2.0 * t), abs=1e-12)


def test_uniform_stationary_222():
    spec = exact_spectrum(HexDomain(2, 2, 2), 0.0)
    assert len(spec.states) == 20
    assert np.allclose(spec.stationary, 1.0 / 20.0, atol=1e-14)
    assert stationarity_residual(spec) < 1e-12
    assert detailed_balance_residual(spec) < 1e-12


def test_tilted_stationary_and_balance():
    spec = exact_spectrum(HexDomain(2, 2, 2), 1.0)
    assert stationarity_residual(spec) < 1e-12
    assert detailed_balance_residual(spec) < 1e-12
    w = np.array([math.exp(0.5 * volume(f)) for f in spec.states])
    assert np.allclose(spec.stationary, w / w.sum(), atol=1e-14)


def test_generator_rows_sum_to_zero():
    for q in (0.0, 1.0, -0.5):
        spec = exact_spectrum(HexDomain(2, 2, 2), q)
        assert np.max(np.abs(spec.generator.sum(axis=1))) < 1e-12
        off = spec.generator - np.diag(np.diag(spec.generator))
        assert np.all(off >= 0)


def test_tv_curve_nonincreasing():
    spec = exact_spectrum(HexDomain(2, 2, 2), 0.5)
    ts = np.linspace(0.0, 30.0, 40)
    tv = spec.tv_curve(ts)
    assert np.all(np.diff(tv) <= 1e-12)
    assert tv[0] > 0.9 and tv[-1] < 1e-3


def test_tmix_monotone_in_eps():
    spec = exact_spectrum(HexDomain(2, 2, 2), 0.0)
    assert tmix_exact(spec, 0.5) < tmix_exact(spec, 0.25) < tmix_exact(spec, 0.0625)


def test_tmix_submultiplicativity():
    """t_mix(eps') <= t_mix(eps) * ceil(log eps' / log(2 eps))."""
    spec = exact_spectrum(HexDomain(2, 2, 2), 0.0)
    t4 = tmix_exact(spec, 0.25)
    t16 = tmix_exact(spec, 1.0 / 16.0)
    factor = math.ceil(math.log(1.0 / 16.0) / math.log(2.0 * 0.25))
    assert factor == 4
    assert t16 <= factor * t4 + 1e-9


def test_tmix_eps_validation():
    spec = exact_spectrum(HexDomain(1, 1, 1), 0.0)
    for eps in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(SpectrumError):
            tmix_exact(spec, eps)


def test_state_limit_enforced():
    with pytest.raises(Exception):
        exact_spectrum(HexDomain(4, 4, 4), 0.0, limit=50)
