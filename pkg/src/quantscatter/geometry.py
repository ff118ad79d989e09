"""Directions, transverse projectors and polarization bases.

All vectors are plain ``numpy`` arrays of shape ``(3,)``. Directions are
renormalized on construction rather than rejected, so slightly-off unit
vectors coming from user input are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12

_EX = np.array([1.0, 0.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])
_EYE = np.eye(3)
_EPS = np.finfo(float).eps
_EYE.setflags(write=False)


def unit(v) -> np.ndarray:
    """Return ``v / |v|``; raises ``ValueError`` for the zero vector."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    norm = math.sqrt(v @ v)
    if not math.isfinite(norm) or norm == 0.0:
        raise ValueError("degenerate direction")
    if abs(norm - 1.0) <= 4 * _EPS:
        # already unit: keep it bit-exact so serialization round trips are stable
        return v.copy()
    return v / norm


def is_unit(v, tol: float = NORM_TOL) -> bool:
    return abs(np.linalg.norm(v) - 1.0) <= tol


def transverse_projector(n) -> np.ndarray:
    """delta_ik - n_i n_k for a unit direction ``n``."""
    n = unit(n)
    return _EYE - n[:, None] * n[None, :]


@dataclass(frozen=True)
class PolarizationBasis:
    """Two real unit polarization vectors orthogonal to ``carrier``."""

    e1: np.ndarray
    e2: np.ndarray
    carrier: np.ndarray

    def __post_init__(self):
        e = np.array([self.e1, self.e2])
        gram = e @ e.T
        if not np.allclose(gram, np.eye(2), atol=1e-10):
            raise ValueError("polarization vectors are not orthonormal")
        if not np.allclose(e @ self.carrier, 0.0, atol=1e-10):
            raise ValueError("polarization vectors are not transverse to the carrier")

    @property
    def matrix(self) -> np.ndarray:
        """3x2 matrix whose columns are e1 and e2."""
        m = self.__dict__.get("_matrix")
        if m is None:
            m = np.column_stack([self.e1, self.e2])
            m.setflags(write=False)
            self.__dict__["_matrix"] = m
        return m

    def vector(self, coeffs) -> np.ndarray:
        """Polarization vector p = c_alpha e_alpha (complex in general)."""
        c = np.asarray(coeffs, dtype=complex)
        return c[0] * self.e1 + c[1] * self.e2


def polarization_basis(s, reference=None) -> PolarizationBasis:
    """Gram-Schmidt basis for the carrier direction ``s``.

    ``e1`` is the component of the reference axis (default ``z``) orthogonal
    to ``s`` and ``e2 = s x e1``. When ``s`` is (anti)parallel to the
    reference the ``x`` axis is used instead, so ``s = z`` gives
    ``e1 = x, e2 = y``, matching :func:`appendix_basis`.
    """
    s = unit(s)
    ref = _EZ if reference is None else unit(reference)
    if abs(s @ ref) > 1.0 - 1e-8:
        ref = _EX if abs(s @ _EX) < 0.5 else np.array([0.0, 1.0, 0.0])
    e1 = unit(ref - (ref @ s) * s)
    e2 = np.cross(s, e1)
    return PolarizationBasis(e1, e2, s)


def appendix_basis(phi: float) -> tuple[PolarizationBasis, PolarizationBasis]:
    """The special frame with s1 = z and s2 in the x3-x2 plane.

    e1 = x for both carriers, e2(s1) = y and e2(s2) = (0, cos phi, -sin phi).
    The carrier transverse to that e2 is s2 = (0, sin phi, cos phi), i.e. s2
    is tilted from s1 by ``phi``. In this frame Theta has a short closed form:
    Theta_11 = c11, Theta_12 = c12 cos phi, Theta_21 = c21, Theta_22 = c22 cos phi,
    Theta_13 = -c12 sin phi, Theta_23 = -c22 sin phi.
    """
    c, s = np.cos(phi), np.sin(phi)
    b1 = PolarizationBasis(_EX.copy(), np.array([0.0, 1.0, 0.0]), _EZ.copy())
    s2 = np.array([0.0, s, c])
    b2 = PolarizationBasis(_EX.copy(), np.array([0.0, c, -s]), s2)
    return b1, b2


def transport_matrices(s, m) -> np.ndarray:
    """Rotations carrying ``s`` onto each row of ``m`` along the great circle.

    Returns shape ``(N, 3, 3)``. Used to extend a basis at ``s`` into a smooth
    polarization field around it; undefined at ``m = -s``.
    """
    s = unit(s)
    m = np.atleast_2d(np.asarray(m, dtype=float))
    v = np.cross(s, m)
    c = m @ s
    if np.any(c <= -1.0 + 1e-12):
        raise ValueError("transport undefined for antipodal directions")
    vx = np.zeros((len(m), 3, 3))
    vx[:, 0, 1], vx[:, 0, 2] = -v[:, 2], v[:, 1]
    vx[:, 1, 0], vx[:, 1, 2] = v[:, 2], -v[:, 0]
    vx[:, 2, 0], vx[:, 2, 1] = -v[:, 1], v[:, 0]
    return np.eye(3) + vx + (vx @ vx) / (1.0 + c)[:, None, None]


@dataclass(frozen=True)
class GeometryScenario:
    """Projections of incidence/detection directions on the separation axis."""

    sigma: float
    nu: float
    kappa: float = 0.0
    chi: float = 0.0

    def __post_init__(self):
        for name in ("sigma", "nu", "kappa"):
            if abs(getattr(self, name)) > 1.0 + 1e-12:
                raise ValueError(f"|{name}| must not exceed 1")


def scenario_params(s, n, a, q=None) -> GeometryScenario:
    """sigma = s.a/|a|, nu = n.a/|a| (and kappa = q.a/|a| if ``q`` given)."""
    a = np.asarray(a, dtype=float)
    amag = np.linalg.norm(a)
    if amag == 0.0:
        raise ValueError("separation vector must be nonzero")
    ahat = a / amag
    sigma = float(unit(s) @ ahat)
    nu = float(unit(n) @ ahat)
    kappa = float(unit(q) @ ahat) if q is not None else 0.0
    return GeometryScenario(sigma=sigma, nu=nu, kappa=kappa, chi=(sigma - nu) / 2.0)
