import math

import numpy as np
import pytest

from quantscatter.analysis import (ScanError, Signal1D, classify_window, domain_Dn,
                                   extrema_spacing, find_extrema, read_signal, resolution_cells,
                                   resolution_report, resolving_measure, scan, signal_to_csv,
                                   spacing_stats, visibility, write_signal)
from quantscatter.presets import fig1_curves

CHI = 0.9


def _sig(f, lo=0.0, hi=4 * np.pi, n=10000, **meta):
    x = np.linspace(lo, hi, n)
    return Signal1D(x, f(x), meta)


def _product(x):
    return np.cos(2 * CHI * x) ** 2 * np.cos(CHI * x) ** 2


def test_signal_validation():
    with pytest.raises(ValueError):
        Signal1D([0, 0], [1, 1])
    with pytest.raises(ValueError):
        Signal1D([0, 1], [1, -1])
    with pytest.raises(ValueError):
        Signal1D([], [])
    with pytest.raises(ValueError):
        Signal1D([0, 1, 2], [1, 1])


@pytest.mark.parametrize("f,expected", [
    (lambda x: 1 + np.cos(4 * x), 1.0),
    (lambda x: 3.0 + 0 * x, 0.0),
    (lambda x: 2 + np.cos(x), 0.5),
])
def test_visibility_examples(f, expected):
    assert visibility(_sig(f)) == pytest.approx(expected, abs=1e-6)


def test_visibility_of_zero_signal_is_zero():
    assert visibility(Signal1D([0, 1, 2], [0, 0, 0])) == 0.0


def test_refinement_recovers_continuum_extremes_on_coarse_grid():
    # 101 samples miss the exact zeros of 1 + cos 4x
    s = _sig(lambda x: 1 + np.cos(4 * x), n=101)
    assert visibility(s, refine=False) < 0.995
    assert visibility(s) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("c", [1e-20, 0.3, 7.0, 1e12])
def test_visibility_scale_invariant(c):
    s = _sig(lambda x: 1.5 + np.sin(3 * x) * np.cos(x))
    assert visibility(s.scaled(c)) == pytest.approx(visibility(s), rel=1e-12)


def test_domain_examples():
    assert domain_Dn(1.0, 0) == pytest.approx((np.pi / 4, 3 * np.pi / 4))
    lo, hi = domain_Dn(0.9, 0)
    assert round(lo, 4) == 0.8727 and round(hi, 4) == 2.618
    lo1, hi1 = domain_Dn(0.9, 1)
    assert (lo1 - lo, hi1 - hi) == pytest.approx((np.pi / 0.9, np.pi / 0.9))
    assert domain_Dn(-1.0, 0) == pytest.approx((-3 * np.pi / 4, -np.pi / 4))
    with pytest.raises(ValueError):
        domain_Dn(0.0, 0)


def test_classify_window():
    d0 = domain_Dn(CHI, 0)
    assert classify_window(d0, CHI) == "inside-D_n"
    assert classify_window((0.05, 0.8), CHI) == "outside-D_n"
    assert classify_window((0.5, 1.5), CHI) == "not-applicable"
    assert classify_window((0.5, 1.5), None) == "not-applicable"


def test_one_photon_spacing_is_quarter_pi():
    s = _sig(lambda x: 1 + np.cos(4 * x))
    for window in [(0.0, np.pi / 2), (1.0, 1.0 + np.pi), (0.3, 4 * np.pi)]:
        assert extrema_spacing(s, window) == pytest.approx(np.pi / 4, abs=2e-3)


def test_product_spacing_inside_and_outside_domain():
    s = _sig(_product)
    inside = extrema_spacing(s, domain_Dn(CHI, 0))
    assert inside == pytest.approx(np.pi / (8 * CHI), rel=0.02)
    # between D_0 and D_1 only the slow factor's spacing is left
    outside = (domain_Dn(CHI, 0)[1], domain_Dn(CHI, 1)[0])
    assert extrema_spacing(s, outside) == pytest.approx(np.pi / (4 * CHI), rel=0.02)
    assert classify_window(outside, CHI) == "outside-D_n"


def test_spacing_invariances():
    s = _sig(_product)
    w = domain_Dn(CHI, 0)
    base = extrema_spacing(s, w)
    affine = Signal1D(s.x, 3.0 * s.y + 0.7)
    assert extrema_spacing(affine, w) == pytest.approx(base, rel=1e-9)
    shifted = Signal1D(s.x + 2.5, s.y)
    assert extrema_spacing(shifted, (w[0] + 2.5, w[1] + 2.5)) == pytest.approx(base, rel=1e-9)


def test_spacing_errors_without_extrema():
    s = _sig(lambda x: x + 1.0)
    with pytest.raises(ValueError):
        extrema_spacing(s, (0.0, 1.0))


def test_spread_flag_for_mixed_window():
    s = _sig(_product)
    stats = spacing_stats(s, (0.0, 4 * np.pi))
    assert stats.flagged
    assert not spacing_stats(_sig(lambda x: 1 + np.cos(4 * x))).flagged


def test_resolution_report_fields():
    s = _sig(_product, chi=CHI)
    rep = resolution_report(s, domain_Dn(CHI, 0), CHI)
    assert rep.domain == "inside-D_n"
    assert 0 <= rep.visibility <= 1
    assert rep.extrema_spacing > 0


def test_plateau_counts_once_at_midpoint():
    x = np.arange(7.0)
    y = np.array([0, 1, 2, 2, 2, 1, 0], float)
    ext = find_extrema(Signal1D(x, y))
    assert len(ext) == 1 and ext[0].x == 3.0 and ext[0].kind == "max"


def test_resolution_cells_and_measure():
    s = _sig(lambda x: 1 + np.cos(4 * x), hi=2 * np.pi)
    cells = resolution_cells(s)
    assert len(cells) == 3
    for lo, hi, sp in cells:
        assert sp == pytest.approx(np.pi / 4, abs=1e-3)
    assert resolving_measure(s, np.pi / 4 + 1e-3) == pytest.approx(1.5 * np.pi, abs=1e-2)
    assert resolving_measure(s, 0.5) == 0.0


def test_fig1_ordering():
    c = fig1_curves(CHI, np.linspace(0, 4 * np.pi, 10000))
    assert np.all(c["green"] <= c["red"] + 1e-12)
    assert np.all(c["red"] <= c["black"] + 1e-12)


def test_scan_single_point_and_order():
    s = scan(lambda x: x * x, [0.5])
    assert len(s) == 1 and s.y[0] == 0.25
    x = np.linspace(0, 1, 50)
    assert np.array_equal(scan(np.cos, x, threads=4).y, scan(np.cos, x).y)
    assert np.all(np.diff(scan(np.cos, x).x) > 0)


def test_scan_reports_offending_point():
    def bad(x):
        if x > 0.5:
            raise ArithmeticError("boom")
        return 1.0
    with pytest.raises(ScanError, match="x=0.75"):
        scan(bad, [0.25, 0.75])


def test_dense_and_half_density_visibility_agree():
    f = lambda x: 0.2 + _product(x)
    dense = visibility(scan(f, np.linspace(0, 4 * np.pi, 2001)))
    half = visibility(scan(f, np.linspace(0, 4 * np.pi, 1001)))
    assert dense == pytest.approx(half, abs=1e-3)


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_signal_round_trip(tmp_path, suffix):
    s = _sig(_product, n=101, scenario="demo", chi=CHI)
    path = tmp_path / f"sig{suffix}"
    write_signal(s, path)
    back = read_signal(path)
    assert np.array_equal(back.x, s.x) and np.array_equal(back.y, s.y)
    assert back.metadata == s.metadata
    assert list(tmp_path.iterdir()) == [path]


def test_csv_has_header_and_units():
    text = signal_to_csv(Signal1D([0.0, 1.0], [1.0, 2.0]))
    assert text.startswith("# units")
    assert "x,y" in text.splitlines()


def test_read_empty_file_rejected(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(ValueError):
        read_signal(p)
