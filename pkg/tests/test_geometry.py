import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantscatter.geometry import (GeometryScenario, PolarizationBasis, appendix_basis, is_unit,
                                   polarization_basis, scenario_params, transport_matrices,
                                   transverse_projector, unit)

coord = st.floats(-10, 10, allow_nan=False)
vec = st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 1e-3)


@pytest.mark.parametrize("v, expected", [
    ((0, 0, 2), (0, 0, 1)),
    ((1, 0, 0), (1, 0, 0)),
    ((1, 1, 0), (1 / math.sqrt(2), 1 / math.sqrt(2), 0)),
])
def test_unit_examples(v, expected):
    np.testing.assert_allclose(unit(v), expected, atol=1e-15)


def test_unit_rejects_zero():
    with pytest.raises(ValueError, match="degenerate direction"):
        unit((0, 0, 0))


def test_projector_axis_cases():
    np.testing.assert_array_equal(transverse_projector((0, 0, 1)), np.diag([1.0, 1.0, 0.0]))
    np.testing.assert_array_equal(transverse_projector((1, 0, 0)), np.diag([0.0, 1.0, 1.0]))


@given(vec)
def test_projector_properties(v):
    n = unit(v)
    P = transverse_projector(n)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P @ n, 0.0, atol=1e-12)
    np.testing.assert_allclose(P, P.T, atol=0)
    assert abs(np.trace(P) - 2.0) < 1e-12
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(P)), [0, 1, 1], atol=1e-12)


@given(vec)
def test_polarization_basis_orthonormal(v):
    b = polarization_basis(v)
    E = np.array([b.e1, b.e2])
    np.testing.assert_allclose(E @ E.T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(E @ b.carrier, 0.0, atol=1e-12)


def test_polarization_basis_on_z_matches_appendix_frame():
    b = polarization_basis((0, 0, 1))
    np.testing.assert_array_equal(b.e1, [1, 0, 0])
    np.testing.assert_array_equal(b.e2, [0, 1, 0])


def test_basis_rejects_non_transverse():
    with pytest.raises(ValueError):
        PolarizationBasis(np.array([1.0, 0, 0]), np.array([0, 0, 1.0]), np.array([0, 0, 1.0]))


def test_appendix_basis_phi_zero():
    b1, b2 = appendix_basis(0.0)
    np.testing.assert_allclose(b1.carrier, [0, 0, 1])
    np.testing.assert_allclose(b2.e2, [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(b1.e1, b2.e1)
    # s2 is the carrier transverse to e2(s2) = (0, cos phi, -sin phi)
    np.testing.assert_allclose(b2.carrier, [0, 0, 1], atol=1e-15)


def test_appendix_basis_phi_half_pi():
    _, b2 = appendix_basis(math.pi / 2)
    np.testing.assert_allclose(b2.e2, [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose(b2.carrier, [0, 1, 0], atol=1e-15)


@pytest.mark.parametrize("phi", np.linspace(0, 2 * np.pi, 17, endpoint=False))
def test_appendix_basis_orthonormal(phi):
    for b in appendix_basis(phi):
        E = np.array([b.e1, b.e2])
        np.testing.assert_allclose(E @ E.T, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(E @ b.carrier, 0.0, atol=1e-12)


def test_scenario_params_examples():
    a = np.array([0.0, 0.0, 2.0])
    sc = scenario_params((0, 0, 1), (0, 0, -1), a)
    assert (sc.sigma, sc.nu) == (1.0, -1.0)
    assert scenario_params((1, 0, 0), (0, 0, 1), a).sigma == 0.0
    t = 0.3
    sc = scenario_params((math.sin(t), 0, math.cos(t)), (0, math.sin(2 * t), math.cos(2 * t)), a)
    assert sc.sigma == pytest.approx(math.cos(t), abs=1e-15)
    assert sc.nu == pytest.approx(math.cos(2 * t), abs=1e-15)


def test_scenario_params_zero_a():
    with pytest.raises(ValueError):
        scenario_params((0, 0, 1), (0, 0, -1), (0, 0, 0))


def test_geometry_scenario_bounds():
    with pytest.raises(ValueError):
        GeometryScenario(sigma=1.2, nu=0.0)


def test_near_unit_inputs_renormalized():
    b = polarization_basis((0, 0, 1 + 1e-13))
    assert is_unit(b.carrier)


def test_transport_carries_basis_smoothly():
    s = unit((0.1, 0.2, 1.0))
    m = np.array([unit((0.12, 0.21, 1.0)), s])
    R = transport_matrices(s, m)
    np.testing.assert_allclose(R[1], np.eye(3), atol=1e-14)
    np.testing.assert_allclose(R[0] @ s, m[0], atol=1e-14)
    np.testing.assert_allclose(R[0] @ R[0].T, np.eye(3), atol=1e-14)
