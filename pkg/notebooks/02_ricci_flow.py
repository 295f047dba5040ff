"""Ricci flow of Einstein metrics and the frozen-eigenvalue approximation.

Run: python notebooks/02_ricci_flow.py
"""
import numpy as np

from ricci_dynamo import FlowSingularity, HyperbolicSpace, RoundSphere, evolve
from ricci_dynamo.ricci_flow import frozen_eigenvalue_gap, lyapunov_spectrum, ricci_eigenvalues

traj = evolve(RoundSphere(1.0), (0.0, 0.2), 1e-3)
print("sphere scale at t = 0.2:", traj.scales[-1], "(exact 1 - 4t =", 1 - 4 * 0.2, ")")

traj = evolve(HyperbolicSpace(1.0), (0.0, 0.5), 1e-2)
print("hyperbolic scale at t = 0.5:", traj.scales[-1])

# The unit sphere collapses at t = 1 / (2 Lambda) = 0.25
try:
    evolve(RoundSphere(1.0), (0.0, 0.3), 1e-3)
except FlowSingularity as exc:
    print(exc)

# Lyapunov exponents gamma_i = -lambda_i from the Ricci eigenproblem
for m in (RoundSphere(1.0), HyperbolicSpace(1.0)):
    spec = lyapunov_spectrum(ricci_eigenvalues(m, [1.0, 1.0, 0.0]))
    print(m.family, "exponents", np.round(spec.exponents, 8), "lambda <= 0:", spec.sign_condition)

# exp(-2 Lambda t) against the exact 1 - 2 Lambda t
for lt in (0.01, 0.05, 0.1, 0.2):
    print(f"Lambda t = {lt:4}: gap {frozen_eigenvalue_gap(lt, 1.0):.3e}   2(Lambda t)^2 = {2 * lt * lt:.3e}")
