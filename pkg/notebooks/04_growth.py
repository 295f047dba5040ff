"""Field growth under the induction equation, predicted and measured.

Run: python notebooks/04_growth.py
"""
import numpy as np

from ricci_dynamo import EuclideanFlat, LinearGradient, RigidRotation, evolve_B, planar_shear
from ricci_dynamo.induction import fast_dynamo_operator
from ricci_dynamo.kinematics import covariant_gradient, decompose

flat = EuclideanFlat()
cases = [
    ("uniform expansion", LinearGradient(np.eye(3)), [1.0, 0.0, 0.0]),
    ("planar shear", planar_shear(2.0), np.array([1.0, 1.0, 0.0]) / np.sqrt(2)),
    ("rigid rotation", RigidRotation([0.0, 0.0, 1.0]), [0.3, -0.5, 0.8]),
]
for name, v, b0 in cases:
    tr = evolve_B(b0, v, flat, "matched", (0.0, 1.0), 1e-3)
    print(f"{name:18} predicted {tr.predicted['without_vorticity']:+.6f}  measured {tr.growth_rate:+.6f}")

# The fast dynamo operator annihilates the exact eigenmode
tr = evolve_B([1.0, 0.0, 0.0], LinearGradient(np.eye(3)), flat, "matched", (0.0, 1.0), 1e-3)
d = decompose(covariant_gradient(LinearGradient(np.eye(3)), flat, np.zeros(3)))
print("operator residual:", fast_dynamo_operator(tr.times, tr.B, d).max_relative)
