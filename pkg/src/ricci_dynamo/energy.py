"""Magnetic energy, its growth rate in two closed forms, marginal shear, and classification.

Two closed forms of d(epsilon)/dt are kept side by side because they do not
agree on curved metrics:

``eq27``       integrand [2 sigma_pl + 1/2 (Omega_lp - theta/3 g_lp) - 4 R_lp] B^p B^l
``eq29chain``  integrand [2 sigma_pl + 1/2 (Omega - theta/3 + 4 Lambda) g_lp] B^p B^l

with Lambda the Einstein constant. The second one drives :func:`marginal_shear`
and :func:`classify`. Integrals use the invariant measure sqrt(det g) d^3x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInput, NotEinstein
from .geometry import MetricField, einstein_check, ricci_tensor
from .induction import MagneticState, induction_rhs
from .kinematics import FlowDecomposition, VelocityField, covariant_gradient
from .numerics import QuadratureSpec, integrate

VARIANTS = ("eq27", "eq29chain")
DEFAULT_TOL = 1e-9

FAST, MARGINAL, DECAYING = "Fast", "Marginal", "Decaying"


def _field_at(B, pts: np.ndarray) -> np.ndarray:
    if isinstance(B, MagneticState):
        b = B.components
    elif callable(B):
        b = np.asarray(B(pts), dtype=float)
    else:
        b = np.asarray(B, dtype=float)
    b = np.broadcast_to(b, pts.shape)
    if not np.all(np.isfinite(b)):
        bad = int(np.argmax(~np.all(np.isfinite(b), axis=-1)))
        raise InvalidInput(f"non-finite magnetic field at {tuple(pts[bad])}")
    return b


def _measure(m: MetricField, pts, t):
    g = m.checked_g(pts, t)
    return g, np.sqrt(np.linalg.det(g))


def magnetic_energy(B, m: MetricField, q: QuadratureSpec, t: float = 0.0) -> float:
    """epsilon = integral of B^i g_ij B^j sqrt(det g) over the box.

    ``B`` is a constant 3-vector, an array of node values, a
    :class:`MagneticState` on the nodes, or a vectorised callable of points.
    """
    pts, w = q.nodes()
    b = _field_at(B, pts)
    g, vol = _measure(m, pts, t)
    dens = np.einsum("ni,nij,nj->n", b, g, b) * vol
    return float(np.sum(w * dens))


def _decomposition_on(flow, m: MetricField, pts: np.ndarray, t: float):
    """(sigma, Omega, theta) arrays over the nodes."""
    n = len(pts)
    if isinstance(flow, FlowDecomposition):
        return (np.broadcast_to(flow.shear, (n, 3, 3)),
                np.broadcast_to(flow.vorticity, (n, 3, 3)),
                np.full(n, flow.expansion))
    if isinstance(flow, VelocityField):
        grad = covariant_gradient(flow, m, pts, t)
        g = m.g(pts, t)
        ginv = np.linalg.inv(g)
        theta = -np.einsum("npl,npl->n", ginv, grad)
        omega = 0.5 * (grad - grad.swapaxes(-1, -2))
        shear = 0.5 * (grad + grad.swapaxes(-1, -2)) + theta[:, None, None] / 3.0 * g
        return shear, omega, theta
    raise InvalidInput("flow must be a FlowDecomposition or a VelocityField")


def energy_rate(flow, B, m: MetricField, q: QuadratureSpec, t: float = 0.0,
                variant: str = "eq27", einstein_constant: float | None = None,
                vorticity_scalar: float | None = None, ricci=None,
                einstein_tol: float = 1e-6) -> float:
    """Closed-form d(epsilon)/dt integrated over ``q``.

    ``flow`` is a uniform :class:`FlowDecomposition` or a velocity field
    decomposed node by node. For ``eq27`` the Ricci tensor is computed from
    ``m`` unless ``ricci`` (an array broadcastable to the nodes) is given. For
    ``eq29chain`` the Einstein constant comes from ``einstein_constant`` or
    :func:`einstein_check`; :class:`NotEinstein` if neither yields one. The
    scalar Omega defaults to the projection of Omega_pl along B (zero for real
    fields) unless ``vorticity_scalar`` is given.
    """
    if variant not in VARIANTS:
        raise InvalidInput(f"unknown energy-rate variant {variant!r}")
    pts, w = q.nodes()
    b = _field_at(B, pts)
    g, vol = _measure(m, pts, t)
    shear, omega, theta = _decomposition_on(flow, m, pts, t)
    bgb = np.einsum("ni,nij,nj->n", b, g, b)
    sbb = np.einsum("ni,nij,nj->n", b, shear, b)
    obb = np.einsum("ni,nij,nj->n", b, omega, b)
    if variant == "eq27":
        r = ricci_tensor(m, pts, t) if ricci is None else np.broadcast_to(ricci, g.shape)
        rbb = np.einsum("ni,nij,nj->n", b, r, b)
        dens = 2.0 * sbb + 0.5 * (obb - theta / 3.0 * bgb) - 4.0 * rbb
    else:
        lam = einstein_constant
        if lam is None:
            lam = einstein_check(m, q, t, einstein_tol)
            if lam is None:
                raise NotEinstein(f"{m.family} is not Einstein on the region")
        with np.errstate(invalid="ignore", divide="ignore"):
            om_scalar = np.where(bgb > 0, obb / np.where(bgb > 0, bgb, 1.0), 0.0)
        if vorticity_scalar is not None:
            om_scalar = np.full_like(bgb, float(vorticity_scalar))
        dens = 2.0 * sbb + 0.5 * (om_scalar - theta / 3.0 + 4.0 * lam) * bgb
    return float(np.sum(w * dens * vol))


def eq29_integrand(shear, omega: float, theta: float, lam: float, metric) -> np.ndarray:
    """The tensor 2 sigma_pl + 1/2 (Omega - theta/3 + 4 Lambda) g_lp."""
    g = np.asarray(metric, dtype=float)
    return 2.0 * np.asarray(shear, dtype=float) + 0.5 * (omega - theta / 3.0 + 4.0 * lam) * g


def marginal_shear(omega: float, theta: float, lam: float, m: MetricField | None = None,
                   p=None, t: float = 0.0, metric=None) -> np.ndarray:
    """sigma_pl = -1/4 (Omega - theta/3 + 4 Lambda) g_lp, the shear that zeroes the eq29 integrand."""
    if metric is not None:
        g = np.asarray(metric, dtype=float)
    elif m is not None:
        g = m.checked_g(np.zeros(3) if p is None else np.asarray(p, dtype=float), t)
    else:
        g = np.eye(3)
    return -0.25 * (omega - theta / 3.0 + 4.0 * lam) * g


@dataclass(frozen=True)
class DynamoVerdict:
    classification: str
    margin: float
    tol: float
    inputs: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"verdict": self.classification, "margin": self.margin, "tol": self.tol,
                "inputs": dict(self.inputs)}


def dynamo_margin(sigma: float, omega: float, theta: float, lam: float) -> float:
    return float(sigma + 0.25 * (omega - theta / 3.0 + 4.0 * lam))


def classify(sigma: float, omega: float, theta: float, lam: float,
             tol: float = DEFAULT_TOL) -> DynamoVerdict:
    """Fast if sigma + (Omega - theta/3 + 4 Lambda)/4 > tol, Decaying if < -tol, else Marginal."""
    if not tol > 0:
        raise InvalidInput("classification tolerance must be positive")
    margin = dynamo_margin(sigma, omega, theta, lam)
    if margin > tol:
        verdict = FAST
    elif margin < -tol:
        verdict = DECAYING
    else:
        verdict = MARGINAL
    return DynamoVerdict(verdict, margin, float(tol),
                         {"sigma": float(sigma), "omega": float(omega),
                          "theta": float(theta), "lambda": float(lam)})


@dataclass
class EnergyReport:
    epsilon: float
    rate_eq27: float | None
    rate_eq29: float | None
    rate_numeric: float | None
    region: QuadratureSpec
    einstein_constant: float | None = None
    variant_divergence: bool = False
    flags: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        q = self.region
        return {
            "epsilon": self.epsilon,
            "rate_eq27": self.rate_eq27,
            "rate_eq29": self.rate_eq29,
            "rate_numeric": self.rate_numeric,
            "einstein_constant": self.einstein_constant,
            "variant_divergence": self.variant_divergence,
            "quadrature": {"lower": list(q.lower), "upper": list(q.upper),
                           "counts": list(q.counts), "rule": q.rule},
            "flags": dict(self.flags),
        }


def variants_diverge(rate_eq27, rate_eq29, epsilon: float, rtol: float = 1e-6) -> bool:
    if rate_eq27 is None or rate_eq29 is None:
        return False
    return abs(rate_eq27 - rate_eq29) > rtol * max(abs(epsilon), abs(rate_eq27), abs(rate_eq29), 1e-300)


def _flowed_metric_factory(m0: MetricField, t0: float, t_end: float, dt: float):
    """Ricci-flow ``m0`` once and return a function time -> static metric."""
    from .geometry import EinsteinScaled
    from .ricci_flow import evolve

    traj = evolve(m0, (t0, t_end), dt)
    if traj.scales is None:
        raise InvalidInput("energy oracle with an evolving metric needs an Einstein or flat family")
    if traj.base is None:
        return lambda s: m0

    def at(s):
        c = float(np.interp(s, traj.times, traj.scales))
        return EinsteinScaled(traj.base, traj.einstein_constant, c)

    return at


def energy_rate_numeric(scenario, t: float | None = None, h: float = 1e-3,
                        dt: float | None = None) -> float:
    """Central difference [epsilon(t+h) - epsilon(t-h)] / 2h along the evolved field.

    ``scenario`` supplies ``metric``, ``velocity``, ``field`` (B at time
    ``t0``), ``frame``, ``region``, ``t0`` and ``evolve_metric``. B is RK4
    integrated at every quadrature node. With ``evolve_metric`` the metric is
    Ricci-flowed from ``t0`` (so ``t - h >= t0`` is required; default
    ``t = t0 + h``); otherwise the metric is used with its own time dependence
    and ``t`` defaults to ``t0``.
    """
    t0 = float(getattr(scenario, "t0", 0.0))
    evolve_metric = bool(getattr(scenario, "evolve_metric", False))
    if t is None:
        t = t0 + h if evolve_metric else t0
    t = float(t)
    m0 = scenario.metric
    q = scenario.region
    pts, _ = q.nodes()
    b0 = np.array(_field_at(scenario.field, pts))
    step = dt if dt is not None else h / 8.0

    if evolve_metric:
        if t - h < t0 - 1e-15:
            raise InvalidInput("with an evolving metric the stencil must start at or after t0")
        metric_at = _flowed_metric_factory(m0, t0, t + h, step)

        def metric_and_time(s):
            return metric_at(s), 0.0
    else:
        def metric_and_time(s):
            return m0, s

    def rhs(tau, y):
        mt, tt = metric_and_time(tau)
        return induction_rhs(y.reshape(b0.shape), scenario.velocity, mt,
                             scenario.frame, pts, tt).ravel()

    def eps(s):
        b = b0
        if s != t0:
            _, states = integrate(rhs, b0.ravel(), t0, s, step)
            b = states[-1].reshape(b0.shape)
        mt, tt = metric_and_time(s)
        return magnetic_energy(b, mt, q, tt)

    return (eps(t + h) - eps(t - h)) / (2.0 * h)
