"""Curvature of the built-in metric families.

Run: python notebooks/01_curvature.py
"""
import numpy as np

from ricci_dynamo import DiagonalCustom, HyperbolicSpace, RoundSphere, einstein_fit, ricci
from ricci_dynamo.numerics import QuadratureSpec

# A point on the 3-sphere chart (chi, theta, phi), away from the coordinate poles
p = np.array([1.0, 1.2, 0.4])

for m in (RoundSphere(1.0), RoundSphere(2.0), HyperbolicSpace(1.0)):
    rep = ricci(m, p)
    print(f"{m!r:30}  R/g = {rep.lambda_hat:+.6f}   residual {rep.residual:.1e}")

# The Einstein fit over a patch recovers the same constant
region = QuadratureSpec((0.5, 0.5, 0.0), (1.0, 1.0, 1.0), (3, 3, 2))
print("sphere patch fit:", einstein_fit(RoundSphere(1.0), region).lambda_hat)

# A bumpy diagonal metric is not Einstein; the fit residual says so
bumpy = DiagonalCustom(lambda x: 1 + 0.3 * np.sin(x[..., 1]),
                       lambda x: np.ones(x.shape[:-1]),
                       lambda x: np.ones(x.shape[:-1]))
fit = einstein_fit(bumpy, QuadratureSpec.cube(0.2, 0.8, 3))
print(f"bumpy metric: lambda_hat {fit.lambda_hat:.4f}, residual {fit.residual:.3f}")
