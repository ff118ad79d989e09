"""Far-field spectral correlators of quantum light scattered off a weak dielectric object."""

from .analysis import Signal1D, domain_Dn, extrema_spacing, resolution_report, spacing_stats, visibility
from .correlators import (BornInconsistencyWarning, Detector, coherent_phi1, entangled_phi2, phi1, phi2,
                          two_laser_phi2)
from .geometry import GeometryScenario, polarization_basis, scenario_params, transverse_projector
from .inverse import FitProblem, FitResult, Unidentifiable, fit, identifiability_report
from .oracle import QuadratureError, QuadratureSpec, phi1_bruteforce, phi2_bruteforce
from .presets import PRESETS, fig1_curves, get_preset
from .scatterer import NumericGrid, Sphere, TwoPointCenters, born_parameter
from .states import (CoherentState, EntangledBiphotonState, OnePhotonState, SpectralEnvelope,
                     TwoModeCoherentState, TwoPhotonState, make_one_photon, symmetrize_two_photon)

__version__ = "0.1.0"
