"""Narrowband field amplitudes and the correlation functions built from them.

Units: c = hbar = eps0 = 1. Every correlator is defined up to the positive
normalization constant of its state; envelopes are normalized so the
angular integral of the amplitude function is 1 and the spectral weight
is 1 at the carrier frequency.

Sign conventions: a scattered field carries ``-|w|^(9/2) G_w(r)``, an
incident one ``+|w|^(5/2) exp(i w r.s)``. Negative detection frequencies
return the complex conjugate of the positive-frequency amplitude.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import PolarizationBasis, transverse_projector, unit
from .states import (CoherentState, EntangledBiphotonState, OnePhotonState, TwoModeCoherentState,
                     TwoPhotonState)

FAR_FIELD_MIN = 100.0


class BornInconsistencyWarning(UserWarning):
    """Incident light reaches the detector alongside first-order scattered light."""


@dataclass(frozen=True)
class Detector:
    """Far-field detector: direction, measured Cartesian component, frequency."""

    direction: np.ndarray
    frequency: float
    component: int = 0
    distance: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "direction", unit(self.direction))
        if self.component not in (0, 1, 2):
            raise ValueError("component must be 0, 1 or 2")
        if not self.distance > 0:
            raise ValueError("distance must be positive")
        if self.frequency == 0:
            raise ValueError("detection frequency must be nonzero")

    @property
    def position(self) -> np.ndarray:
        return self.distance * self.direction

    @property
    def far_field(self) -> bool:
        return self.distance * abs(self.frequency) >= FAR_FIELD_MIN

    def swapped_with(self, **changes) -> "Detector":
        d = dict(direction=self.direction, frequency=self.frequency,
                 component=self.component, distance=self.distance)
        d.update(changes)
        return Detector(**d)


@dataclass(frozen=True)
class FieldAmplitude:
    vector: np.ndarray
    kind: str
    frequency: float

    def component(self, i: int):
        return self.vector[..., i]


def green(omega: float, r: float) -> complex:
    """Outgoing free Green function -exp(i|w|r) / (4 pi r)."""
    if not r > 0:
        raise ValueError("Green function needs r > 0")
    return -np.exp(1j * abs(omega) * r) / (4.0 * np.pi * r)


def _real(v):
    """Plain float for scalars; arrays pass through for batched models."""
    v = np.real(v)
    return float(v) if np.ndim(v) == 0 else np.asarray(v, dtype=float)


def _complex(v):
    return complex(v) if np.ndim(v) == 0 else np.asarray(v, dtype=complex)


def _contract(L1, theta, L2, i1, i2):
    """(L1 Theta L2^T)_(i1 i2), batched over any leading axes of L1 and L2."""
    return np.einsum("...j,jk,...k->...", L1[..., i1, :], theta, L2[..., i2, :])


def theta_tensor(c, basis1: PolarizationBasis, basis2: PolarizationBasis) -> np.ndarray:
    """Theta_ij = c_ab e_a|i(s1) e_b|j(s2)."""
    c = np.asarray(c, dtype=complex)
    return basis1.matrix @ c @ basis2.matrix.T


def scattering_operator(omega: float, s, n, distance: float, model) -> np.ndarray:
    """-|w|^(9/2) G_w(r) P(n) eps[w(s - n)], acting on incident polarizations."""
    w = abs(omega)
    q = w * (unit(s) - unit(n))
    return -(w**4.5) * green(w, distance) * (transverse_projector(n) @ model.ft(q))


def _incident_reaches(envelope, n) -> bool:
    # wave packets reach the far field only near the forward and backward axes
    cos_cut = np.cos(3.0 * envelope.angular_width)
    return abs(float(envelope.carrier_direction @ n)) >= cos_cut


def incident_factor(envelope, detector: Detector) -> complex:
    """|w|^(5/2) exp(i w r.s) if the packet reaches the detector, else 0."""
    if not _incident_reaches(envelope, detector.direction):
        return 0.0j
    w = abs(detector.frequency)
    return w**2.5 * np.exp(1j * w * detector.position @ envelope.carrier_direction)


def _maybe_conj(vec, omega):
    return np.conj(vec) if omega < 0 else vec


def one_photon_scattered_amp(state, detector: Detector, model) -> FieldAmplitude:
    """Narrowband scattered amplitude <0|E^(s)(w, r)|psi>."""
    env = state.envelope
    gate = env.frequency_gate(detector.frequency)
    if gate == 0.0:
        vec = np.zeros(3, dtype=complex)
    else:
        op = scattering_operator(detector.frequency, env.carrier_direction, detector.direction,
                                 detector.distance, model)
        vec = gate * (op @ state.polarization)
    return FieldAmplitude(_maybe_conj(vec, detector.frequency), "scattered", detector.frequency)


def one_photon_incident_amp(state, detector: Detector) -> FieldAmplitude:
    """Narrowband incident amplitude <0|E^(in)(w, r)|psi>."""
    env = state.envelope
    gate = env.frequency_gate(detector.frequency)
    vec = gate * incident_factor(env, detector) * state.polarization
    return FieldAmplitude(_maybe_conj(np.asarray(vec, dtype=complex), detector.frequency),
                          "incident", detector.frequency)


def born_consistent(state, detector: Detector) -> bool:
    """False when un-eliminated incident light reaches the measured component."""
    inc = one_photon_incident_amp(state, detector).vector[..., detector.component]
    return bool(abs(inc) == 0.0)


def phi1(state: OnePhotonState, detector: Detector, model, include_incident: bool = False) -> float:
    """One-detector correlation |<0|E_i|psi>|^2 for a one-photon state.

    With ``include_incident`` the incident amplitude is added; if it does not
    vanish on the measured component a :class:`BornInconsistencyWarning` is
    emitted, because the first-order scattered term is then not the leading
    model-dependent contribution.
    """
    i = detector.component
    amp = one_photon_scattered_amp(state, detector, model).vector[..., i]
    if include_incident:
        inc = one_photon_incident_amp(state, detector).vector[..., i]
        if inc != 0:
            warnings.warn("incident field reaches the detector un-eliminated; "
                          "first-order Born result is not meaningful", BornInconsistencyWarning,
                          stacklevel=2)
        amp = amp + inc
    return _real(abs(amp) ** 2)


def coherent_phi1(state: CoherentState, detector: Detector, model) -> float:
    """Intensity for a coherent state: incident, cross and scattered terms."""
    i = detector.component
    inc = one_photon_incident_amp(state, detector).vector[..., i]
    sca = one_photon_scattered_amp(state, detector, model).vector[..., i]
    return _real(abs(state.amplitude) ** 2 * abs(inc + sca) ** 2)


def coherent_phi1_terms(state: CoherentState, detector: Detector, model) -> dict:
    """The three pieces of :func:`coherent_phi1` separately."""
    i = detector.component
    inc = one_photon_incident_amp(state, detector).vector[..., i]
    sca = one_photon_scattered_amp(state, detector, model).vector[..., i]
    A2 = abs(state.amplitude) ** 2
    return {"incident": A2 * abs(inc) ** 2,
            "cross": _real(A2 * 2.0 * np.real(np.conj(inc) * sca)),
            "scattered": _real(A2 * abs(sca) ** 2)}


def _leg_operator(kind: str, envelope, detector: Detector, model) -> np.ndarray:
    if kind == "s":
        return scattering_operator(detector.frequency, envelope.carrier_direction,
                                   detector.direction, detector.distance, model)
    return incident_factor(envelope, detector) * np.eye(3)


def _assignments(state: TwoPhotonState, det1: Detector, det2: Detector):
    """Photon-to-detector assignments with nonzero spectral weight."""
    env = state.envelopes
    for u, v in ((0, 1), (1, 0)):
        g = env[u].frequency_gate(det1.frequency) * env[v].frequency_gate(det2.frequency)
        if g != 0.0:
            yield u, v, g


def two_photon_amp_terms(state: TwoPhotonState, det1: Detector, det2: Detector, model) -> dict:
    """<0|E^(u)_i1 E^(v)_i2|psi2> for (u, v) in {in, s}^2.

    Each term is ``2 g (L1 Theta L2^T)_(i1 i2)`` with ``L`` the incident or
    scattering operator of each leg. For degenerate carriers both
    photon-to-detector assignments are added and the sum halved.
    """
    i1, i2 = det1.component, det2.component
    c = state.pol_matrix
    out = {}
    for k1 in ("in", "s"):
        for k2 in ("in", "s"):
            total = 0.0j
            for u, v, g in _assignments(state, det1, det2):
                theta = theta_tensor(c, state.bases[u], state.bases[v])
                L1 = _leg_operator(k1[0], state.envelopes[u], det1, model)
                L2 = _leg_operator(k2[0], state.envelopes[v], det2, model)
                total = total + 2.0 * g * _contract(L1, theta, L2, i1, i2)
            if state.degenerate:
                total *= 0.5
            out[(k1, k2)] = _complex(total)
    return out


def two_photon_scattered_amp(state: TwoPhotonState, det1: Detector, det2: Detector, model) -> complex:
    """Narrowband two-photon scattered amplitude projected on (i1, i2)."""
    i1, i2 = det1.component, det2.component
    total = 0.0j
    for u, v, g in _assignments(state, det1, det2):
        theta = theta_tensor(state.pol_matrix, state.bases[u], state.bases[v])
        M1 = _leg_operator("s", state.envelopes[u], det1, model)
        M2 = _leg_operator("s", state.envelopes[v], det2, model)
        total = total + 2.0 * g * _contract(M1, theta, M2, i1, i2)
    if state.degenerate:
        total *= 0.5
    return _complex(total)


def phi2(state: TwoPhotonState, det1: Detector, det2: Detector, model,
         include_incident: bool = False) -> float:
    """Coincidence correlation |<0|E_i1 E_i2|psi2>|^2 (scattered only by default)."""
    if not include_incident:
        return _real(abs(two_photon_scattered_amp(state, det1, det2, model)) ** 2)
    terms = two_photon_amp_terms(state, det1, det2, model)
    if any(np.any(abs(v) > 0) for k, v in terms.items() if k != ("s", "s")):
        warnings.warn("incident field contributes to the coincidence amplitude",
                      BornInconsistencyWarning, stacklevel=2)
    return _real(abs(sum(terms.values())) ** 2)


def entangled_amplitude(state: EntangledBiphotonState, det1: Detector, det2: Detector,
                        model) -> complex:
    """Sum of the two branch amplitudes, both using Theta(s1, s2)."""
    return (two_photon_scattered_amp(state.branch_state("a"), det1, det2, model)
            + two_photon_scattered_amp(state.branch_state("b"), det1, det2, model))


def entangled_phi2(state: EntangledBiphotonState, det1: Detector, det2: Detector, model) -> float:
    w1, w2 = state.frequencies
    if abs(w1 - w2) <= 1e-12 * max(w1, w2):
        raise ValueError("entangled biphoton correlator requires distinct frequencies")
    return _real(abs(entangled_amplitude(state, det1, det2, model)) ** 2)


def _laser_mode_functions(state: TwoModeCoherentState, det1: Detector, det2: Detector, model):
    """x[u, v]: scattered amplitude of mode v (unit |A|, zero phase) at detector u."""
    rows = [[one_photon_scattered_amp(mode, det, model).vector[..., det.component]
             for mode in state.modes] for det in (det1, det2)]
    return np.array(np.broadcast_arrays(*rows[0], *rows[1]), dtype=complex).reshape(
        (2, 2) + np.shape(rows[0][0]))


def two_laser_phi2(state: TwoModeCoherentState, det1: Detector, det2: Detector, model,
                   seed=None, n_samples: int = 0) -> float:
    """Coincidence signal for two independent lasers.

    For a product of coherent states the normally ordered correlator is
    ``|F1|^2 |F2|^2`` with ``F_u`` the mean field at detector ``u``. Random
    phases are averaged analytically unless ``n_samples > 0``, in which
    case a seeded Monte Carlo average is returned instead.
    """
    x = _laser_mode_functions(state, det1, det2, model)
    A = np.array([m.amplitude for m in state.modes])
    if state.phase_mode == "fixed":
        F0 = x[0, 0] * A[0] + x[0, 1] * A[1]
        F1 = x[1, 0] * A[0] + x[1, 1] * A[1]
        return _real(abs(F0) ** 2 * abs(F1) ** 2)
    mod4 = abs(A[0]) ** 4
    if n_samples > 0:
        rng = np.random.default_rng(seed)
        ph = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(n_samples, 2)))
        ph = ph.reshape((n_samples, 2) + (1,) * (x.ndim - 2))
        F0 = ph[:, 0] * x[0, 0] + ph[:, 1] * x[0, 1]
        F1 = ph[:, 0] * x[1, 0] + ph[:, 1] * x[1, 1]
        return _real(mod4 * np.mean(np.abs(F0) ** 2 * np.abs(F1) ** 2, axis=0))
    p = np.abs(x) ** 2
    cross = 2.0 * np.real(x[0, 0] * np.conj(x[0, 1]) * np.conj(x[1, 0]) * x[1, 1])
    return _real(mod4 * ((p[0, 0] + p[0, 1]) * (p[1, 0] + p[1, 1]) + cross))
