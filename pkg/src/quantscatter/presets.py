"""Ready-made scattering scenarios.

Every scenario places two point scatterers at ``+-a z`` and exposes the
correlator as a function of the separation ``a`` and the scanned
(first-photon) frequency ``omega``. States and detectors do not depend on
``a``, so they are built once per frequency and cached.

The chi-geometry puts photon 1 on ``sigma1 - nu1 = 2 chi`` and photon 2 on
``omega2 (sigma2 - nu2) = omega1 chi`` with a fixed frequency ratio, so
the coincidence signal of an isotropic scatterer is
``cos^2(2 a omega chi) cos^2(a omega chi)`` up to a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .correlators import (Detector, coherent_phi1, entangled_phi2, phi1, phi2, theta_tensor,
                          transverse_projector, two_laser_phi2)
from .scatterer import TwoPointCenters, TwoPointFamily
from .states import (CoherentState, EntangledBiphotonState, SpectralEnvelope, TwoModeCoherentState,
                     make_one_photon, symmetrize_two_photon)

Z = np.array([0.0, 0.0, 1.0])
DISTANCE = 1e3
LAMBDA_SCALE = 0.1


def generic_lambda(scale: float = LAMBDA_SCALE) -> np.ndarray:
    """A fixed anisotropic tensor whose principal axes are not the lab axes."""
    rot = np.array([[0.8, -0.6, 0.0], [0.6, 0.8, 0.0], [0.0, 0.0, 1.0]])
    tilt = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, -0.8], [0.0, 0.8, 0.6]])
    R = tilt @ rot
    return scale * (R @ np.diag([1.0, 0.4, 0.7]) @ R.T)


def direction(proj: float, azimuth: float) -> np.ndarray:
    """Unit vector with z-projection ``proj`` at the given azimuth."""
    t = math.sqrt(max(0.0, 1.0 - proj * proj))
    return np.array([t * math.cos(azimuth), t * math.sin(azimuth), proj])


def _split(diff: float) -> tuple[float, float]:
    """Projections (sigma, nu) with sigma - nu = diff, kept off sigma = -nu."""
    if not 0 < diff < 2:
        raise ValueError("projection difference must lie in (0, 2)")
    nu = -1.0 + 0.4 * (2.0 - diff)
    return nu + diff, nu


@dataclass(frozen=True)
class ChiGeometry:
    """Directions realizing the sub-optimal resolution constraints."""

    chi: float
    ratio: float  # omega2 / omega1
    s1: np.ndarray = field(init=False)
    n1: np.ndarray = field(init=False)
    s2: np.ndarray = field(init=False)
    n2: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0.5 < abs(self.chi) < 1:
            raise ValueError("chi must satisfy 1/2 < |chi| < 1")
        if not 0.5 < self.ratio < 1:
            raise ValueError("frequency ratio must lie in (1/2, 1)")
        sg1, nu1 = _split(2 * self.chi)
        sg2, nu2 = _split(self.chi / self.ratio)
        object.__setattr__(self, "s1", direction(sg1, 0.0))
        object.__setattr__(self, "n1", direction(nu1, 0.0))
        object.__setattr__(self, "s2", direction(sg2, math.pi / 2))
        object.__setattr__(self, "n2", direction(nu2, math.pi / 2))


@dataclass(frozen=True)
class EntangledGeometry:
    """Two branches with kappa1 = sigma1, kappa1 - nu1 = 2 chi and the
    photon-2 relations that turn the branch sum into cos(a w chi) cos(a w chi / 2)."""

    chi: float
    ratio: float
    q1: np.ndarray = field(init=False)
    q2: np.ndarray = field(init=False)
    s1: np.ndarray = field(init=False)
    s2: np.ndarray = field(init=False)
    n1: np.ndarray = field(init=False)
    n2: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0.5 < abs(self.chi) < 1:
            raise ValueError("chi must satisfy 1/2 < |chi| < 1")
        d = self.chi / self.ratio
        if not 0.5 < self.ratio < 1 or 1.5 * d >= 2:
            raise ValueError("frequency ratio too small for this chi")
        sg1, nu1 = _split(2 * self.chi)
        nu2 = -1.0 + 0.4 * (2.0 - 1.5 * d)
        sg2, kp2 = nu2 + 1.5 * d, nu2 + 0.5 * d
        object.__setattr__(self, "s1", direction(sg1, 0.0))
        object.__setattr__(self, "q1", direction(sg1, math.pi / 2))
        object.__setattr__(self, "n1", direction(nu1, 0.0))
        object.__setattr__(self, "s2", direction(sg2, math.pi / 2))
        object.__setattr__(self, "q2", direction(kp2, math.pi))
        object.__setattr__(self, "n2", direction(nu2, math.pi / 2))


def _best_components(m: np.ndarray) -> tuple[int, int]:
    i, j = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    return int(i), int(j)


@dataclass(frozen=True)
class Scenario:
    """A named forward model ``a, omega -> correlator`` plus scan defaults.

    ``omega0`` is the reference frequency used when scanning ``x = a omega``,
    ``chi`` the resolution parameter (``None`` for one-photon scenarios),
    ``alias_chi`` the effective chi whose fast factor sets the alias period.
    """

    name: str
    kind: str
    omega0: float = 1.0
    chi: float | None = None
    ratio: float = 0.75
    angular_width: float = 0.01
    lam_scale: float = LAMBDA_SCALE
    anisotropic: bool = True
    description: str = ""

    @property
    def alias_chi(self) -> float:
        return 1.0 if self.chi is None else abs(self.chi)

    @property
    def lam(self) -> np.ndarray:
        return generic_lambda(self.lam_scale) if self.anisotropic else self.lam_scale * np.eye(3)

    def model(self, a: float) -> TwoPointCenters:
        return TwoPointCenters(self.lam, a * Z)

    def evaluate(self, a: float, omega: float | None = None) -> float:
        omega = self.omega0 if omega is None else float(omega)
        setup = _setup(self, omega)
        return setup(self.model(a))

    def forward(self, a: float, omegas) -> np.ndarray:
        model = self.model(a)
        return np.array([_setup(self, float(w))(model) for w in np.atleast_1d(omegas)])

    def forward_many(self, a_values, omegas) -> np.ndarray:
        """Correlator table of shape ``(len(a_values), len(omegas))``."""
        a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
        fam = TwoPointFamily(self.lam, a_values[:, None] * Z)
        cols = [np.broadcast_to(_setup(self, float(w))(fam), a_values.shape)
                for w in np.atleast_1d(omegas)]
        return np.stack(cols, axis=1)

    def signal_vs_x(self, x) -> np.ndarray:
        """Correlator on ``x = a omega0`` at the fixed reference frequency."""
        a = np.atleast_1d(np.asarray(x, dtype=float)) / self.omega0
        fam = TwoPointFamily(self.lam, a[:, None] * Z)
        return np.broadcast_to(_setup(self, self.omega0)(fam), a.shape).copy()

    def expected_shape(self, x) -> np.ndarray | None:
        """Closed-form shape in ``x = a omega`` (arbitrary scale), if known."""
        x = np.asarray(x, dtype=float)
        c = self.chi
        if self.kind in ("one_photon", "coherent_eliminated"):
            return np.cos(2 * x) ** 2
        if self.kind in ("two_photon", "two_laser"):
            return np.cos(2 * c * x) ** 2 * np.cos(c * x) ** 2
        if self.kind == "entangled":
            return np.cos(2 * c * x) ** 2 * np.cos(c * x) ** 2 * np.cos(c * x / 2) ** 2
        return None


@lru_cache(maxsize=4096)
def _setup(sc: Scenario, omega: float):
    """Closure ``model -> correlator`` with states and detectors for ``omega`` fixed."""
    w = sc.angular_width
    if sc.kind in ("one_photon", "coherent"):
        if sc.kind == "one_photon":
            st = make_one_photon(omega, Z, [1, 0], angular_width=w)
            det = Detector(-Z, omega, component=1, distance=DISTANCE)
            return lambda m: phi1(st, det, m)
        env = SpectralEnvelope(omega, Z, w)
        st = CoherentState(env, [1, 0], 1.0)
        det = Detector(-Z, omega, component=0, distance=DISTANCE)
        return lambda m: coherent_phi1(st, det, m)

    w2 = sc.ratio * omega
    if sc.kind == "entangled":
        g = EntangledGeometry(sc.chi, sc.ratio)
        c = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2)
        st = EntangledBiphotonState((g.q1, g.q2), (g.s1, g.s2), (omega, w2), c, w)
        theta = theta_tensor(st.pol_matrix, *st.bases)
        i1, i2 = _best_components(transverse_projector(g.n1) @ theta @ transverse_projector(g.n2).T)
        d1 = Detector(g.n1, omega, i1, DISTANCE)
        d2 = Detector(g.n2, w2, i2, DISTANCE)
        return lambda m: entangled_phi2(st, d1, d2, m)

    g = ChiGeometry(sc.chi, sc.ratio)
    env1, env2 = SpectralEnvelope(omega, g.s1, w), SpectralEnvelope(w2, g.s2, w)
    if sc.kind == "two_photon":
        c = np.array([[0.0, 1.0], [1.0, 0.0]]) / math.sqrt(2)
        st = symmetrize_two_photon((env1, env2), c)
        theta = theta_tensor(st.pol_matrix, *st.bases)
        i1, i2 = _best_components(transverse_projector(g.n1) @ theta @ transverse_projector(g.n2).T)
        d1 = Detector(g.n1, omega, i1, DISTANCE)
        d2 = Detector(g.n2, w2, i2, DISTANCE)
        return lambda m: phi2(st, d1, d2, m)
    if sc.kind == "two_laser":
        m1, m2 = CoherentState(env1, [1, 0], 1.0), CoherentState(env2, [1, 0], 1.0)
        st = TwoModeCoherentState((m1, m2), "random")
        i1 = int(np.argmax(np.abs(transverse_projector(g.n1) @ m1.polarization)))
        i2 = int(np.argmax(np.abs(transverse_projector(g.n2) @ m2.polarization)))
        d1 = Detector(g.n1, omega, i1, DISTANCE)
        d2 = Detector(g.n2, w2, i2, DISTANCE)
        return lambda m: two_laser_phi2(st, d1, d2, m)
    raise ValueError(f"unknown scenario kind {sc.kind!r}")


PRESETS = {
    "one-photon-backscatter": Scenario(
        "one-photon-backscatter", "one_photon",
        description="one photon, back-scattering, incident light removed by polarization"),
    "coherent-backscatter": Scenario(
        "coherent-backscatter", "coherent",
        description="coherent state, back-scattering, co-polarized detection"),
    "two-photon-chi09": Scenario(
        "two-photon-chi09", "two_photon", chi=0.9, anisotropic=False,
        description="non-degenerate photon pair on the chi = 0.9 geometry"),
    "two-laser": Scenario(
        "two-laser", "two_laser", chi=0.9, anisotropic=False,
        description="two independent lasers with random phases, chi = 0.9 geometry"),
    "entangled": Scenario(
        "entangled", "entangled", chi=0.9, anisotropic=False,
        description="two-branch entangled biphoton, chi = 0.9"),
}


def get_preset(name: str) -> Scenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def fig1_curves(chi: float, x) -> dict:
    """The three resolution curves on ``x = a omega``.

    red: cos^2(2 x chi) cos^2(x chi); black: cos^2(2 x chi);
    green: red * cos^2(x chi / 2).
    """
    if not 0.5 < abs(chi) < 1:
        raise ValueError("chi must satisfy 1/2 < |chi| < 1 (sub-optimal resolution geometry)")
    x = np.asarray(x, dtype=float)
    black = np.cos(2 * x * chi) ** 2
    red = black * np.cos(x * chi) ** 2
    green = red * np.cos(x * chi / 2) ** 2
    return {"x": x, "red": red, "black": black, "green": green}


@dataclass(frozen=True)
class ExplicitScenario:
    """A user-specified state, model and geometry with the same interface as
    :class:`Scenario`. The free parameter ``a`` is the half-separation of a
    two-point model along ``axis`` or the radius of a sphere."""

    state: str                      # one_photon | coherent | two_photon
    model_kind: str = "two_point"   # two_point | sphere
    lam: tuple = (LAMBDA_SCALE,)
    axis: tuple = (0.0, 0.0, 1.0)
    s1: tuple = (0.0, 0.0, 1.0)
    n1: tuple = (0.0, 0.0, -1.0)
    pol1: tuple = (1.0, 0.0)
    component1: int = 1
    s2: tuple | None = None
    n2: tuple | None = None
    component2: int = 0
    pol_matrix: tuple = (0.0, 1.0, 1.0, 0.0)
    ratio: float = 0.75
    omega0: float = 1.0
    angular_width: float = 0.01
    chi: float | None = None
    name: str = "explicit"

    def __post_init__(self):
        if self.state not in ("one_photon", "coherent", "two_photon"):
            raise ValueError(f"unknown state {self.state!r}")
        if self.model_kind not in ("two_point", "sphere"):
            raise ValueError(f"unknown model {self.model_kind!r}")
        if self.state == "two_photon" and (self.s2 is None or self.n2 is None):
            raise ValueError("a two-photon state needs s2 and n2")
        if len(self.lam) not in (1, 9):
            raise ValueError("lambda takes 1 or 9 numbers")
        for c in (self.component1, self.component2):
            if c not in (0, 1, 2):
                raise ValueError("detector components are 0, 1 or 2")

    @property
    def lam_matrix(self) -> np.ndarray:
        lam = np.asarray(self.lam, dtype=float)
        return lam[0] * np.eye(3) if lam.size == 1 else lam.reshape(3, 3)

    def model(self, a: float):
        from .scatterer import Sphere
        if self.model_kind == "sphere":
            return Sphere(self.lam_matrix, a)
        return TwoPointCenters(self.lam_matrix, a * np.asarray(self.axis, dtype=float)
                               / np.linalg.norm(self.axis))

    def _closure(self, omega: float):
        cache = self.__dict__.setdefault("_cache", {})
        if omega not in cache:
            cache[omega] = self._build(omega)
        return cache[omega]

    def _build(self, omega: float):
        w = self.angular_width
        s1, n1 = np.asarray(self.s1, float), np.asarray(self.n1, float)
        if self.state == "one_photon":
            st = make_one_photon(omega, s1, self.pol1, angular_width=w)
            det = Detector(n1, omega, self.component1, DISTANCE)
            return lambda m: phi1(st, det, m)
        if self.state == "coherent":
            st = CoherentState(SpectralEnvelope(omega, s1, w), self.pol1, 1.0)
            det = Detector(n1, omega, self.component1, DISTANCE)
            return lambda m: coherent_phi1(st, det, m)
        w2 = self.ratio * omega
        envs = (SpectralEnvelope(omega, s1, w), SpectralEnvelope(w2, np.asarray(self.s2, float), w))
        st = symmetrize_two_photon(envs, np.asarray(self.pol_matrix, float).reshape(2, 2))
        d1 = Detector(n1, omega, self.component1, DISTANCE)
        d2 = Detector(np.asarray(self.n2, float), w2, self.component2, DISTANCE)
        return lambda m: phi2(st, d1, d2, m)

    def evaluate(self, a: float, omega: float | None = None) -> float:
        return float(self._closure(self.omega0 if omega is None else float(omega))(self.model(a)))

    def forward_many(self, a_values, omegas) -> np.ndarray:
        a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
        omegas = np.atleast_1d(omegas)
        if self.model_kind == "two_point":
            axis = np.asarray(self.axis, dtype=float) / np.linalg.norm(self.axis)
            fam = TwoPointFamily(self.lam_matrix, a_values[:, None] * axis)
            return np.stack([np.broadcast_to(self._closure(float(w))(fam), a_values.shape)
                             for w in omegas], axis=1)
        return np.array([[self.evaluate(a, w) for w in omegas] for a in a_values])

    def signal_vs_x(self, x) -> np.ndarray:
        a = np.atleast_1d(np.asarray(x, dtype=float)) / self.omega0
        return self.forward_many(a, [self.omega0])[:, 0]

    @property
    def alias_chi(self) -> float:
        return 1.0 if self.chi is None else abs(self.chi)


@dataclass(frozen=True)
class FitDesign:
    """How a synthetic experiment for a preset is scanned and bounded.

    Tunable sources (single photons, lasers) are scanned over a broad
    frequency band. Photon-pair sources have a fixed pump, so pair presets
    get a narrow band; there the fit needs prior knowledge of ``a``.
    ``lower_bound_prior`` marks bounds whose lower edge is itself prior
    information (the D_0 lower edge).
    """

    omegas: np.ndarray
    a_true: float
    bounds: tuple
    prior_domain: int | None = None
    lower_bound_prior: bool = False


def _broad():
    return np.linspace(0.5, 1.5, 41)


def _narrow():
    return np.linspace(1.0, 1.05, 41)


def fit_design(name: str) -> FitDesign:
    sc = get_preset(name)
    if sc.kind in ("one_photon", "coherent", "two_laser"):
        return FitDesign(_broad(), 1.3, (0.2, 4.0))
    from .analysis import domain_Dn
    lo = domain_Dn(sc.chi, 0)[0] / sc.omega0
    if sc.kind == "two_photon":
        return FitDesign(_narrow(), 1.3, (lo, 7.0), prior_domain=0, lower_bound_prior=True)
    return FitDesign(_narrow(), 1.3, (lo, 7.0), lower_bound_prior=True)
