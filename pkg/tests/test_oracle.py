import numpy as np
import pytest

from quantscatter.correlators import Detector, phi1, phi2, theta_tensor
from quantscatter.geometry import unit
from quantscatter.oracle import (QuadratureError, QuadratureSpec, phi1_bruteforce,
                                 phi2_bruteforce, phi2_semifactorized, sphere_rule, width_sweep)
from quantscatter.geometry import transverse_projector
from quantscatter.presets import ChiGeometry, _best_components
from quantscatter.scatterer import TwoPointCenters
from quantscatter.states import SpectralEnvelope, make_one_photon, symmetrize_two_photon

Z = np.array([0.0, 0.0, 1.0])
OFFDIAG = np.array([[0.0, 1.0], [1.0, 0.0]]) / np.sqrt(2)


@pytest.mark.parametrize("center,width", [(Z, None), (Z, 0.01), (unit([1, -2, 0.5]), 0.04),
                                          (-Z, 0.3)])
def test_rule_integrates_constants_and_first_moments(center, width):
    nodes, w = sphere_rule(QuadratureSpec(), center, width)
    assert w.sum() == pytest.approx(4 * np.pi, abs=1e-10)
    np.testing.assert_allclose(w @ nodes, 0.0, atol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0, atol=1e-14)


def test_minimum_node_count():
    with pytest.raises(ValueError):
        QuadratureSpec(n_theta=4)
    with pytest.raises(ValueError):
        QuadratureSpec(n_phi=7)
    assert QuadratureSpec(8, 8).refined() == QuadratureSpec(16, 16)


def _backscatter(lam_aniso, width):
    st = make_one_photon(1.0, Z, [1, 0], angular_width=width)
    return st, Detector(-Z, 1.0, component=1), TwoPointCenters(lam_aniso, 0.3 * Z)


def test_phi1_matches_closed_form_at_narrow_width(lam_aniso):
    st, det, m = _backscatter(lam_aniso, 0.01)
    assert phi1_bruteforce(st, det, m) == pytest.approx(phi1(st, det, m), rel=1e-2)


def test_width_sweep_error_decreases_monotonically(lam_aniso):
    st, det, m = _backscatter(lam_aniso, 0.01)
    rows = width_sweep(lambda w: make_one_photon(1.0, Z, [1, 0], angular_width=w), det, m)
    errs = [r["rel_error"] for r in rows]
    assert [r["width"] for r in rows] == [0.04, 0.02, 0.01]
    assert errs[0] > errs[1] > errs[2]


def test_phi1_zero_lambda_is_zero():
    st = make_one_photon(1.0, Z, [1, 0], angular_width=0.02)
    det = Detector(-Z, 1.0, component=0)
    assert phi1_bruteforce(st, det, TwoPointCenters(np.zeros((3, 3)), Z)) == 0.0


def test_non_convergent_rule_raises(lam_aniso):
    # a broad envelope with a large scatterer needs far more than 8 nodes
    st = make_one_photon(1.0, Z, [1, 0], angular_width=0.5)
    det = Detector(unit([1, 0, -1]), 1.0, component=1)
    with pytest.raises(QuadratureError) as info:
        phi1_bruteforce(st, det, TwoPointCenters(lam_aniso, [20, 6, 20]), QuadratureSpec(8, 8))
    assert info.value.coarse != info.value.fine


def _chi_pair(width, c=OFFDIAG):
    g = ChiGeometry(0.9, 0.75)
    envs = (SpectralEnvelope(1.0, g.s1, width), SpectralEnvelope(0.75, g.s2, width))
    st = symmetrize_two_photon(envs, c)
    theta = theta_tensor(st.pol_matrix, *st.bases)
    i1, i2 = _best_components(transverse_projector(g.n1) @ theta @ transverse_projector(g.n2).T)
    return st, Detector(g.n1, 1.0, i1), Detector(g.n2, 0.75, i2)


def test_phi2_matches_closed_form(lam_iso):
    st, d1, d2 = _chi_pair(0.02)
    m = TwoPointCenters(lam_iso, 0.4 * Z)
    assert phi2_bruteforce(st, d1, d2, m) == pytest.approx(phi2(st, d1, d2, m), rel=2e-2)


def test_phi2_zero_polarization_matrix_is_zero(lam_iso):
    st, d1, d2 = _chi_pair(0.02, np.zeros((2, 2)))
    assert phi2_bruteforce(st, d1, d2, TwoPointCenters(lam_iso, 0.4 * Z)) == 0.0


def test_semifactorized_spot_check(lam_aniso):
    # photon 2 nearly monochromatic in direction: collapsing its integral changes little
    g = ChiGeometry(0.9, 0.75)
    envs = (SpectralEnvelope(1.0, g.s1, 0.03), SpectralEnvelope(0.75, g.s2, 1e-4))
    st = symmetrize_two_photon(envs, OFFDIAG)
    d1, d2 = Detector(g.n1, 1.0, 0), Detector(g.n2, 0.75, 1)
    m = TwoPointCenters(lam_aniso, [0.1, 0.2, 0.5])
    full = phi2_bruteforce(st, d1, d2, m)
    semi = phi2_semifactorized(st, d1, d2, m, collapse=2)
    assert semi == pytest.approx(full, rel=1e-3)
    with pytest.raises(ValueError):
        phi2_semifactorized(st, d1, d2, m, collapse=3)
