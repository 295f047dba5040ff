"""Vorticity, shear and expansion of simple flows.

Run: python notebooks/03_kinematics.py
"""
import numpy as np

from ricci_dynamo import EuclideanFlat, LinearGradient, RigidRotation, RoundSphere, planar_shear
from ricci_dynamo.kinematics import covariant_gradient, decompose, shear_eigensystem, vorticity_magnitude

flat = EuclideanFlat()
origin = np.zeros(3)

flows = {
    "uniform expansion v = x": LinearGradient(np.eye(3)),
    "planar shear S = 2": planar_shear(2.0),
    "rigid rotation about e3": RigidRotation([0.0, 0.0, 1.0]),
}
for name, v in flows.items():
    d = decompose(covariant_gradient(v, flat, origin))
    vals, _ = shear_eigensystem(d.shear)
    print(f"{name:26} theta {d.expansion:+.3f}  shear eig {np.round(vals, 3)}  "
          f"|Omega| {vorticity_magnitude(d.vorticity):.3f}")

# On the sphere the decomposition uses the local metric
sphere = RoundSphere(1.0)
p = np.array([1.0, 1.2, 0.4])
d = decompose(covariant_gradient(planar_shear(1.0), sphere, p), sphere, p)
print("sphere reconstruction residual:", np.abs(d.reconstruct() - d.gradient).max())
