import pytest

from hexmix.dynamics import ChainConfig, cftp_sample
from hexmix.hexlattice import (
    HexDomain,
    HexlatticeError,
    HeightField,
    enumerate_all,
    extreme_tilings,
)
from hexmix.render import lozenges, render_svg


def test_111_has_three_lozenges():
    for f in enumerate_all(HexDomain(1, 1, 1)):
        assert len(lozenges(f)) == 3


def test_lozenge_count_3n2():
    for n in (2, 3, 4):
        d = HexDomain(n, n, n)
        f = cftp_sample(ChainConfig(domain=d, seed=n))
        assert len(lozenges(f)) == 3 * n * n


def test_lozenge_count_general_hexagon():
    d = HexDomain(2, 3, 4)
    lo, hi = extreme_tilings(d)
    for f in (lo, hi):
        assert len(lozenges(f)) == d.lozenge_capacity()


def test_orientation_counts_balance():
    # each tiling of (a,b,c) has ab + bc + ca lozenges split by orientation
    d = HexDomain(2, 2, 2)
    for f in enumerate_all(d):
        by_pat = {}
        for pat, _ in lozenges(f):
            by_pat[pat] = by_pat.get(pat, 0) + 1
        assert sorted(by_pat.values()) == [4, 4, 4]


def test_inadmissible_pattern_rejected():
    d = HexDomain(1, 1, 1)
    lo, _ = extreme_tilings(d)
    bad = HeightField(d, lo.h.copy())
    h = bad.h.copy()
    h[1, 1] = 5
    with pytest.raises(HexlatticeError):
        lozenges(HeightField(d, h))


def test_svg_deterministic():
    d = HexDomain(4, 4, 4)
    f = cftp_sample(ChainConfig(domain=d, seed=8))
    a = render_svg(f, show_level_lines=True, show_arctic=True, show_analytic_levels=True)
    b = render_svg(f, show_level_lines=True, show_arctic=True, show_analytic_levels=True)
    assert a == b
    assert a.startswith("<svg ") and a.rstrip().endswith("</svg>")


def test_level_line_overlay_count():
    d = HexDomain(2, 3, 2)
    lo, _ = extreme_tilings(d)
    plain = render_svg(lo)
    with_lines = render_svg(lo, show_level_lines=True)
    extra = with_lines.count("<path") - plain.count("<path")
    assert extra == d.nb


def test_polygon_count_matches_lozenges():
    d = HexDomain(3, 3, 3)
    f = cftp_sample(ChainConfig(domain=d, seed=2))
    svg = render_svg(f)
    assert svg.count("<polygon") == 27
