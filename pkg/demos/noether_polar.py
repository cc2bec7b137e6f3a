"""Angular momentum of a radially damped particle in a double-well potential.

The damping does not depend on the angle, so the discrete momentum map of
rotations is conserved exactly by the midpoint rule even though energy
decays. Adding isotropic damping breaks the symmetry of the force and the
momentum map drifts.

    python demos/noether_polar.py
"""

import numpy as np

from forcedvi.continuous import ForcedLagrangianSystem
from forcedvi.discrete import Seed, run_trajectory
from forcedvi.discretizers import midpoint_discretize
from forcedvi.symmetry import conserved_drift, momentum_series, translation
from forcedvi.systems import polar_double_well

theta = translation(2, 1, "rotation")
radial = polar_double_well(1e-2)
ds = midpoint_discretize(radial, 0.1)
tr = run_trajectory(ds, Seed.velocity([1.2, 0.0], [0.1, 0.5], radial), 1000)
print("radial damping:    angular momentum drift over 1000 steps %.2e" % conserved_drift(tr, ds, theta))

iso = ForcedLagrangianSystem(
    n=2, lagrangian=radial.lagrangian, rayleigh=lambda q, v: 0.5e-2 * (v[0] ** 2 + q[0] ** 2 * v[1] ** 2),
    dL_dq=radial.dL_dq, dL_dv=radial.dL_dv, d2L_dv2=radial.d2L_dv2, d2L_dvdq=radial.d2L_dvdq)
ds_iso = midpoint_discretize(iso, 0.1)
tr_iso = run_trajectory(ds_iso, Seed.velocity([1.2, 0.0], [0.1, 0.5], iso), 1000)
J = momentum_series(tr_iso, ds_iso, theta)
print("isotropic damping: angular momentum %.4f -> %.4f" % (J[0], J[-1]))
print("                   envelope every 200 steps:",
      " ".join("%.2e" % np.max(np.abs(J[:k] - J[0])) for k in range(200, 1001, 200)))
