"""Magnetic energy, its two closed-form rates, and the dynamo verdict.

Run: python notebooks/05_energy.py
"""
from types import SimpleNamespace

import numpy as np

from ricci_dynamo import (
    EuclideanFlat,
    RoundSphere,
    Uniform,
    classify,
    energy_rate,
    energy_rate_numeric,
    magnetic_energy,
    marginal_shear,
    planar_shear,
)
from ricci_dynamo.numerics import QuadratureSpec

flat = EuclideanFlat()
box = QuadratureSpec.cube(-0.5, 0.5, 3)
b = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
v = planar_shear(2.0)
sc = SimpleNamespace(metric=flat, velocity=v, field=b, frame="matched", region=box, t0=0.0,
                     evolve_metric=False)
print("flat shear: closed", energy_rate(v, b, flat, box), " numeric", energy_rate_numeric(sc))

# On the sphere with no flow the two closed forms disagree by a factor -2
sphere = RoundSphere(1.0)
patch = QuadratureSpec((0.5, 0.5, 0.0), (1.0, 1.0, 1.0), (6, 6, 4))
zero = Uniform([0.0, 0.0, 0.0])
eps = magnetic_energy([1.0, 0.0, 0.0], sphere, patch)
for variant in ("eq27", "eq29chain"):
    rate = energy_rate(zero, [1.0, 0.0, 0.0], sphere, patch, variant=variant)
    print(f"sphere {variant:9}: rate / eps = {rate / eps:+.6f}")

# Marginal shear sits exactly on the classifier boundary
omega, theta, lam = 1.0, -3.0, 0.5
sig = marginal_shear(omega, theta, lam)[0, 0]
for ds in (-1e-3, 0.0, 1e-3):
    print(f"sigma {sig + ds:+.4f}: {classify(sig + ds, omega, theta, lam).classification}")
