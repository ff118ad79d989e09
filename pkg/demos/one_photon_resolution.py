"""One photon scattered back from two point scatterers.

The incident photon is polarized along x and the detector reads the y
component, so incident light never reaches it. What is left oscillates
as 1 + cos(4 a omega): fringes a quarter of pi apart with full visibility.
"""

import numpy as np

from quantscatter import Detector, TwoPointCenters, make_one_photon, phi1
from quantscatter.analysis import Signal1D, extrema_spacing, visibility
from quantscatter.presets import generic_lambda, get_preset


def fringes():
    sc = get_preset("one-photon-backscatter")
    x = np.linspace(0.0, 4 * np.pi, 2000)
    sig = Signal1D(x, sc.signal_vs_x(x))
    print(f"visibility      {visibility(sig):.12f}")
    print(f"extrema spacing {extrema_spacing(sig):.6f}   (pi/4 = {np.pi / 4:.6f})")


def elimination_needs_anisotropy():
    z = np.array([0.0, 0.0, 1.0])
    st = make_one_photon(1.0, z, [1, 0])
    det = Detector(-z, 1.0, component=1)
    for label, lam in [("isotropic", 0.1 * np.eye(3)), ("anisotropic", generic_lambda(0.1))]:
        vals = [phi1(st, det, TwoPointCenters(lam, a * z)) for a in np.linspace(0.1, 3, 30)]
        print(f"{label:12s} max signal {max(vals):.3e}")


if __name__ == "__main__":
    fringes()
    elimination_needs_anisotropy()
