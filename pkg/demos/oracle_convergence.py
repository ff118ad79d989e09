"""Closed-form correlators against direct quadrature.

The closed forms evaluate everything at the carrier direction. The
oracle integrates the full wave packet instead; the two agree better
and better as the packet narrows.
"""

import numpy as np

from quantscatter import Detector, TwoPointCenters, make_one_photon
from quantscatter.oracle import width_sweep
from quantscatter.presets import generic_lambda

z = np.array([0.0, 0.0, 1.0])
det = Detector(-z, 1.0, component=1)
model = TwoPointCenters(generic_lambda(0.1), 1.3 * z)
rows = width_sweep(lambda w: make_one_photon(1.0, z, [1, 0], angular_width=w), det, model)
for r in rows:
    print(f"width {r['width']:.2f}  closed {r['closed_form']:.6e}  "
          f"quadrature {r['quadrature']:.6e}  rel error {r['rel_error']:.2e}")
