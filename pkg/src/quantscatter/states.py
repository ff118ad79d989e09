"""Incident-field states described by their narrowband amplitude data.

Mode operators never appear: every correlator in this package reduces to
vacuum matrix elements, which only need the amplitude functions. Overall
state norms are folded into one positive constant per state, so all
correlators are defined up to that constant.

Spectral envelopes are Gaussian in frequency and von Mises-Fisher-like in
direction, ``exp(-(1 - m.s) / w^2)``, normalized to unit solid-angle
integral. At the carrier frequency the narrowband amplitude factor is 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import PolarizationBasis, polarization_basis, unit

GATE_WIDTHS = 3.0


def _basis_to_dict(b: PolarizationBasis) -> dict:
    return {"e1": b.e1.tolist(), "e2": b.e2.tolist(), "carrier": b.carrier.tolist()}


def _basis_from_dict(d: dict) -> PolarizationBasis:
    return PolarizationBasis(np.array(d["e1"], float), np.array(d["e2"], float),
                             np.array(d["carrier"], float))


def _cplx(v):
    return [[float(np.real(x)), float(np.imag(x))] for x in np.ravel(v)]


def _uncplx(v, shape):
    return np.array([complex(re, im) for re, im in v]).reshape(shape)


@dataclass(frozen=True, eq=False)
class SpectralEnvelope:
    carrier_frequency: float
    carrier_direction: np.ndarray
    angular_width: float = 0.01
    frequency_width: float | None = None

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier frequency must be positive")
        if not self.angular_width > 0:
            raise ValueError("angular width must be positive")
        fw = self.frequency_width
        if fw is None:
            fw = 0.01 * self.carrier_frequency
        if not fw > 0:
            raise ValueError("frequency width must be positive")
        object.__setattr__(self, "frequency_width", float(fw))
        object.__setattr__(self, "carrier_direction", unit(self.carrier_direction))

    @property
    def narrowband(self) -> bool:
        return self.angular_width < 0.1 and self.frequency_width < 0.1 * self.carrier_frequency

    def frequency_gate(self, omega: float) -> float:
        """Gaussian spectral weight, exactly zero beyond three widths."""
        d = abs(omega) - self.carrier_frequency
        if abs(d) > GATE_WIDTHS * self.frequency_width:
            return 0.0
        return float(np.exp(-0.5 * (d / self.frequency_width) ** 2))

    def angular_norm(self) -> float:
        w2 = self.angular_width**2
        return 2.0 * np.pi * w2 * -np.expm1(-2.0 / w2)

    def angular_profile(self, m) -> np.ndarray:
        """Direction profile with unit integral over the sphere."""
        m = np.atleast_2d(m)
        return np.exp(-(1.0 - m @ self.carrier_direction) / self.angular_width**2) / self.angular_norm()

    def with_direction(self, s) -> "SpectralEnvelope":
        return SpectralEnvelope(self.carrier_frequency, s, self.angular_width, self.frequency_width)

    def to_dict(self) -> dict:
        return {"carrier_frequency": self.carrier_frequency,
                "carrier_direction": self.carrier_direction.tolist(),
                "angular_width": self.angular_width,
                "frequency_width": self.frequency_width}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralEnvelope":
        return cls(d["carrier_frequency"], np.array(d["carrier_direction"], float),
                   d["angular_width"], d["frequency_width"])

    def __eq__(self, other):
        return type(other) is type(self) and self.to_dict() == other.to_dict()


class _State:
    kind = ""

    def __eq__(self, other):
        return type(other) is type(self) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _normalized(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex).reshape(2)
    norm = np.linalg.norm(c)
    if norm == 0:
        raise ValueError("polarization coefficients must not both be zero")
    if abs(norm - 1.0) <= 4 * np.finfo(float).eps:
        return c
    return c / norm


@dataclass(frozen=True, eq=False)
class OnePhotonState(_State):
    envelope: SpectralEnvelope
    pol_coeffs: np.ndarray
    basis: PolarizationBasis = None

    kind = "one_photon"

    def __post_init__(self):
        object.__setattr__(self, "pol_coeffs", _normalized(self.pol_coeffs))
        if self.basis is None:
            object.__setattr__(self, "basis", polarization_basis(self.envelope.carrier_direction))
        elif not np.allclose(self.basis.carrier, self.envelope.carrier_direction, atol=1e-10):
            raise ValueError("basis carrier must equal the envelope direction")

    @property
    def polarization(self) -> np.ndarray:
        """p(s) = c_alpha e_alpha(s)."""
        return self.basis.vector(self.pol_coeffs)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "envelope": self.envelope.to_dict(),
                "pol_coeffs": _cplx(self.pol_coeffs), "basis": _basis_to_dict(self.basis)}

    @classmethod
    def from_dict(cls, d):
        return cls(SpectralEnvelope.from_dict(d["envelope"]), _uncplx(d["pol_coeffs"], (2,)),
                   _basis_from_dict(d["basis"]))


def make_one_photon(omega_hat: float, s, c, angular_width: float = 0.01,
                    frequency_width: float | None = None, basis=None) -> OnePhotonState:
    env = SpectralEnvelope(omega_hat, s, angular_width, frequency_width)
    return OnePhotonState(env, c, basis)


def eliminated_component_exists(state, component: int, tol: float = 1e-12) -> bool:
    """True when the incident polarization has no projection on ``component``."""
    return bool(abs(state.polarization[component]) <= tol)


@dataclass(frozen=True, eq=False)
class CoherentState(_State):
    envelope: SpectralEnvelope
    pol_coeffs: np.ndarray
    amplitude: complex = 1.0
    basis: PolarizationBasis = None

    kind = "coherent"

    def __post_init__(self):
        object.__setattr__(self, "pol_coeffs", _normalized(self.pol_coeffs))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.basis is None:
            object.__setattr__(self, "basis", polarization_basis(self.envelope.carrier_direction))

    @property
    def polarization(self) -> np.ndarray:
        return self.basis.vector(self.pol_coeffs)

    def with_phase(self, phi: float) -> "CoherentState":
        return CoherentState(self.envelope, self.pol_coeffs,
                             abs(self.amplitude) * np.exp(1j * phi), self.basis)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "envelope": self.envelope.to_dict(),
                "pol_coeffs": _cplx(self.pol_coeffs), "amplitude": _cplx([self.amplitude])[0],
                "basis": _basis_to_dict(self.basis)}

    @classmethod
    def from_dict(cls, d):
        return cls(SpectralEnvelope.from_dict(d["envelope"]), _uncplx(d["pol_coeffs"], (2,)),
                   complex(*d["amplitude"]), _basis_from_dict(d["basis"]))


def _fill_symmetric(c) -> np.ndarray:
    """Symmetric completion of a 2x2 coefficient matrix.

    Missing entries (``None`` or NaN) are copied from their mirror; when
    both mirrored entries are present only their symmetric part survives.
    """
    raw = np.array([[np.nan if x is None else x for x in row] for row in np.asarray(c, dtype=object)],
                   dtype=complex)
    if raw.shape != (2, 2):
        raise ValueError("two-photon polarization matrix must be 2x2")
    missing = np.isnan(raw)
    filled = np.where(missing, raw.T, raw)
    if np.any(np.isnan(filled)):
        raise ValueError("polarization matrix entries missing on both sides of the diagonal")
    return 0.5 * (filled + filled.T)


@dataclass(frozen=True, eq=False)
class TwoPhotonState(_State):
    """Factorized two-photon amplitude c_ab C(w1 m1, w2 m2).

    The direction/frequency envelope is a product of the two envelopes;
    its bosonic mirror image is implied.
    """

    envelopes: tuple
    pol_matrix: np.ndarray
    bases: tuple = None

    kind = "two_photon"

    def __post_init__(self):
        c = np.asarray(self.pol_matrix, dtype=complex)
        if c.shape != (2, 2) or not np.allclose(c, c.T, atol=1e-14):
            raise ValueError("pol_matrix must be a symmetric 2x2 matrix; use symmetrize_two_photon")
        object.__setattr__(self, "pol_matrix", c)
        object.__setattr__(self, "envelopes", tuple(self.envelopes))
        if self.bases is None:
            object.__setattr__(self, "bases", tuple(polarization_basis(e.carrier_direction)
                                                    for e in self.envelopes))

    @property
    def degenerate(self) -> bool:
        w1, w2 = (e.carrier_frequency for e in self.envelopes)
        return bool(abs(w1 - w2) <= 1e-12 * max(w1, w2))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "envelopes": [e.to_dict() for e in self.envelopes],
                "pol_matrix": _cplx(self.pol_matrix),
                "bases": [_basis_to_dict(b) for b in self.bases]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(SpectralEnvelope.from_dict(e) for e in d["envelopes"]),
                   _uncplx(d["pol_matrix"], (2, 2)),
                   tuple(_basis_from_dict(b) for b in d["bases"]))


def symmetrize_two_photon(envelopes, pol_matrix, bases=None) -> TwoPhotonState:
    """Bosonic-symmetric, canonically ordered two-photon state.

    The photon with the higher carrier frequency (ties broken by direction)
    is listed first; swapping the photons transposes the polarization
    matrix, so swapped inputs give equal states.
    """
    c = _fill_symmetric(pol_matrix)
    envelopes = tuple(envelopes)
    if bases is None:
        bases = tuple(polarization_basis(e.carrier_direction) for e in envelopes)
    key = [(-e.carrier_frequency, tuple(np.round(e.carrier_direction, 12))) for e in envelopes]
    if key[1] < key[0]:
        envelopes, bases, c = envelopes[::-1], tuple(bases)[::-1], c.T
    return TwoPhotonState(envelopes, c, tuple(bases))


@dataclass(frozen=True, eq=False)
class EntangledBiphotonState(_State):
    """Superposition of two biphoton terms, directions (q1, q2) and (s1, s2)."""

    branch_a: tuple
    branch_b: tuple
    frequencies: tuple
    pol_matrix: np.ndarray
    envelope_width: float = 0.01
    frequency_width: float | None = None
    bases: tuple = None

    kind = "entangled_biphoton"

    def __post_init__(self):
        w1, w2 = (float(w) for w in self.frequencies)
        if not (w1 > 0 and w2 > 0):
            raise ValueError("frequencies must be positive")
        if abs(w1 - w2) <= 1e-12 * max(w1, w2):
            raise ValueError("entangled biphoton requires distinct frequencies")
        object.__setattr__(self, "frequencies", (w1, w2))
        object.__setattr__(self, "branch_a", tuple(unit(v) for v in self.branch_a))
        object.__setattr__(self, "branch_b", tuple(unit(v) for v in self.branch_b))
        c = _fill_symmetric(self.pol_matrix)
        object.__setattr__(self, "pol_matrix", c)
        if self.bases is None:
            object.__setattr__(self, "bases", tuple(polarization_basis(s) for s in self.branch_b))

    def branch_envelopes(self, branch: str) -> tuple:
        dirs = self.branch_a if branch == "a" else self.branch_b
        return tuple(SpectralEnvelope(w, s, self.envelope_width, self.frequency_width)
                     for w, s in zip(self.frequencies, dirs))

    def branch_state(self, branch: str) -> TwoPhotonState:
        """The single product term of one branch, sharing the polarization tensor."""
        cache = self.__dict__.setdefault("_branch_cache", {})
        if branch not in cache:
            cache[branch] = TwoPhotonState(self.branch_envelopes(branch), self.pol_matrix, self.bases)
        return cache[branch]

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "branch_a": [v.tolist() for v in self.branch_a],
                "branch_b": [v.tolist() for v in self.branch_b],
                "frequencies": list(self.frequencies),
                "pol_matrix": _cplx(self.pol_matrix),
                "envelope_width": self.envelope_width,
                "frequency_width": self.frequency_width,
                "bases": [_basis_to_dict(b) for b in self.bases]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(np.array(v) for v in d["branch_a"]),
                   tuple(np.array(v) for v in d["branch_b"]),
                   tuple(d["frequencies"]), _uncplx(d["pol_matrix"], (2, 2)),
                   d["envelope_width"], d["frequency_width"],
                   tuple(_basis_from_dict(b) for b in d["bases"]))


@dataclass(frozen=True, eq=False)
class TwoModeCoherentState(_State):
    """Two independent laser modes of equal intensity.

    ``phase_mode`` is ``"fixed"`` (use the amplitudes' own phases) or
    ``"random"`` (independent uniform phases, averaged over).
    """

    modes: tuple
    phase_mode: str = "random"

    kind = "two_mode_coherent"

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(modes) != 2:
            raise ValueError("exactly two modes required")
        if not np.isclose(abs(modes[0].amplitude), abs(modes[1].amplitude), rtol=1e-12, atol=0):
            raise ValueError("both modes must have equal |A|")
        if self.phase_mode not in ("fixed", "random"):
            raise ValueError("phase_mode must be 'fixed' or 'random'")
        object.__setattr__(self, "modes", modes)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "modes": [m.to_dict() for m in self.modes],
                "phase_mode": self.phase_mode}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(CoherentState.from_dict(m) for m in d["modes"]), d["phase_mode"])


_KINDS = {cls.kind: cls for cls in (OnePhotonState, CoherentState, TwoPhotonState,
                                    EntangledBiphotonState, TwoModeCoherentState)}


def state_from_dict(d: dict):
    try:
        cls = _KINDS[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown state kind {d.get('kind')!r}") from None
    return cls.from_dict(d)


def state_from_json(text: str):
    return state_from_dict(json.loads(text))
