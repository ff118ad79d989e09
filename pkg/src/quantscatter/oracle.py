"""Brute-force solid-angle quadrature of the un-factorized amplitudes.

The closed forms in :mod:`quantscatter.correlators` pull the polarization
vector and the susceptibility transform out of the direction integral at
the carrier direction. Here that integral is done numerically, with the
polarization basis carried smoothly around the carrier by great-circle
transport, so the two routes agree only in the narrowband limit.

The frequency delta is integrated analytically; only directions are
sampled, at the detection frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .correlators import Detector, green, phi1, phi2
from .geometry import polarization_basis, transport_matrices, transverse_projector
from .states import OnePhotonState, TwoPhotonState

MIN_NODES = 8
CONVERGENCE_RTOL = 1e-3


class QuadratureError(RuntimeError):
    """Raised when doubling the node counts changes the result too much."""

    def __init__(self, message, coarse, fine):
        super().__init__(f"{message}: coarse={coarse!r} fine={fine!r}")
        self.coarse = coarse
        self.fine = fine


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre in cos(theta) x uniform azimuth.

    The polar axis is put on the envelope carrier. ``n_theta`` nodes cover
    the cap of half-angle ``cap_widths * width`` and another ``n_theta`` the
    rest of the sphere, so the weights always sum to 4 pi.
    """

    n_theta: int = 24
    n_phi: int = 24
    cap_widths: float = 8.0

    def __post_init__(self):
        if self.n_theta < MIN_NODES or self.n_phi < MIN_NODES:
            raise ValueError(f"node counts must be at least {MIN_NODES}")

    def refined(self) -> "QuadratureSpec":
        return replace(self, n_theta=2 * self.n_theta, n_phi=2 * self.n_phi)


def _gl(n, lo, hi):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def sphere_rule(spec: QuadratureSpec, center=(0.0, 0.0, 1.0), width: float | None = None):
    """Nodes ``(N, 3)`` and weights ``(N,)`` on the unit sphere."""
    cap = np.pi if width is None else min(spec.cap_widths * width, np.pi)
    if cap >= np.pi - 1e-12:
        mu, wmu = _gl(2 * spec.n_theta, -1.0, 1.0)
    else:
        c = np.cos(cap)
        m1, w1 = _gl(spec.n_theta, c, 1.0)
        m2, w2 = _gl(spec.n_theta, -1.0, c)
        mu, wmu = np.concatenate([m1, m2]), np.concatenate([w1, w2])
    phi = 2.0 * np.pi * np.arange(spec.n_phi) / spec.n_phi
    sin_t = np.sqrt(1.0 - mu**2)
    local = np.stack([np.outer(sin_t, np.cos(phi)), np.outer(sin_t, np.sin(phi)),
                      np.outer(mu, np.ones_like(phi))], axis=-1).reshape(-1, 3)
    weights = np.outer(wmu, np.full(spec.n_phi, 2.0 * np.pi / spec.n_phi)).ravel()
    b = polarization_basis(center)
    frame = np.column_stack([b.e1, b.e2, b.carrier])
    return local @ frame.T, weights


def _leg_rows(envelope, basis, detector: Detector, model, spec: QuadratureSpec):
    """Per-node weighted rows [P(n) eps[w(m - n)] E(m)]_(i, alpha) * w R(m)."""
    nodes, weights = sphere_rule(spec, envelope.carrier_direction, envelope.angular_width)
    w = abs(detector.frequency)
    eps = model.ft(w * (nodes - detector.direction))                    # (N, 3, 3)
    E = transport_matrices(envelope.carrier_direction, nodes) @ basis.matrix  # (N, 3, 2)
    proj = transverse_projector(detector.direction)[detector.component]  # (3,)
    rows = np.einsum("k,nkj,nja->na", proj, eps, E)
    return rows, weights * envelope.angular_profile(nodes)


def _scatter_prefactor(detector: Detector) -> complex:
    w = abs(detector.frequency)
    return -(w**4.5) * green(w, detector.distance)


def _phi1_once(state: OnePhotonState, detector: Detector, model, spec) -> float:
    env = state.envelope
    gate = env.frequency_gate(detector.frequency)
    if gate == 0.0:
        return 0.0
    rows, wr = _leg_rows(env, state.basis, detector, model, spec)
    amp = gate * _scatter_prefactor(detector) * (wr @ rows @ state.pol_coeffs)
    return float(abs(amp) ** 2)


def _checked(fn, spec: QuadratureSpec, what: str) -> float:
    coarse = fn(spec)
    fine = fn(spec.refined())
    scale = max(abs(fine), abs(coarse))
    if scale > 0 and abs(fine - coarse) > CONVERGENCE_RTOL * scale:
        raise QuadratureError(f"{what} quadrature not converged on node doubling", coarse, fine)
    return fine


def phi1_bruteforce(state: OnePhotonState, detector: Detector, model,
                    quad: QuadratureSpec | None = None) -> float:
    """Scattered-only one-photon correlator by direct direction quadrature."""
    spec = quad or QuadratureSpec()
    return _checked(lambda sp: _phi1_once(state, detector, model, sp), spec, "phi1")


def _phi2_once(state: TwoPhotonState, det1: Detector, det2: Detector, model, spec,
               collapse: int | None = None) -> float:
    env = state.envelopes
    pref = _scatter_prefactor(det1) * _scatter_prefactor(det2)
    total = 0.0j
    for u, v in ((0, 1), (1, 0)):
        g = env[u].frequency_gate(det1.frequency) * env[v].frequency_gate(det2.frequency)
        if g == 0.0:
            continue
        U, wu = _leg_rows(env[u], state.bases[u], det1, model, spec)
        V, wv = _leg_rows(env[v], state.bases[v], det2, model, spec)
        if collapse == 1:
            U, wu = _carrier_row(env[u], state.bases[u], det1, model), np.ones(1)
        elif collapse == 2:
            V, wv = _carrier_row(env[v], state.bases[v], det2, model), np.ones(1)
        # full double sum over node pairs; the joint envelope is tabulated
        joint = np.outer(wu, wv)
        K = U @ state.pol_matrix @ V.T
        total += 2.0 * g * np.sum(joint * K)
    if state.degenerate:
        total *= 0.5
    return float(abs(pref * total) ** 2)


def _carrier_row(envelope, basis, detector, model):
    w = abs(detector.frequency)
    eps = model.ft(w * (envelope.carrier_direction - detector.direction))
    proj = transverse_projector(detector.direction)[detector.component]
    return (proj @ eps @ basis.matrix)[None, :]


def phi2_bruteforce(state: TwoPhotonState, det1: Detector, det2: Detector, model,
                    quad: QuadratureSpec | None = None) -> float:
    """Scattered-only coincidence correlator by double direction quadrature."""
    spec = quad or QuadratureSpec()
    return _checked(lambda sp: _phi2_once(state, det1, det2, model, sp), spec, "phi2")


def phi2_semifactorized(state: TwoPhotonState, det1: Detector, det2: Detector, model,
                        quad: QuadratureSpec | None = None, collapse: int = 2) -> float:
    """As :func:`phi2_bruteforce` with detector ``collapse``'s integral done in closed form."""
    if collapse not in (1, 2):
        raise ValueError("collapse must be 1 or 2")
    spec = quad or QuadratureSpec()
    return _checked(lambda sp: _phi2_once(state, det1, det2, model, sp, collapse), spec, "phi2")


def width_sweep(make_state, detector: Detector, model, widths=(0.04, 0.02, 0.01),
                quad: QuadratureSpec | None = None) -> list[dict]:
    """Closed form vs quadrature for one-photon states of decreasing width.

    ``make_state(width)`` builds the state. Returns one row per width with
    the relative error ``|oracle - closed| / closed`` (0 when both vanish).
    """
    rows = []
    for w in widths:
        st = make_state(w)
        closed = phi1(st, detector, model)
        brute = phi1_bruteforce(st, detector, model, quad)
        if closed == 0.0:
            err = 0.0 if brute == 0.0 else float("inf")
        else:
            err = abs(brute - closed) / closed
        rows.append({"width": w, "closed_form": closed, "quadrature": brute, "rel_error": err})
    return rows


def width_sweep_two_photon(make_state, det1: Detector, det2: Detector, model,
                           widths=(0.04, 0.02, 0.01), quad: QuadratureSpec | None = None) -> list[dict]:
    rows = []
    for w in widths:
        st = make_state(w)
        closed = phi2(st, det1, det2, model)
        brute = phi2_bruteforce(st, det1, det2, model, quad)
        err = (0.0 if brute == 0.0 else float("inf")) if closed == 0.0 else abs(brute - closed) / closed
        rows.append({"width": w, "closed_form": closed, "quadrature": brute, "rel_error": err})
    return rows
