"""Metric families and static differential geometry in three dimensions.

All evaluators are vectorised: a point argument may be a single 3-vector or an
``(..., 3)`` array, and tensor outputs gain the matching leading axes.

Index layout used throughout:

* ``g[..., i, j]``                metric components g_ij
* ``dg[..., k, i, j]``            coordinate derivative d_k g_ij
* ``gamma[..., a, b, c]``         Levi-Civita coefficient Gamma^a_{bc}
* ``ricci[..., i, j]``            Ricci tensor R_ij

Connection coefficients are computed in the coordinate frame; these play the
role of the rotation coefficients of a moving frame (d_k e_i = Gamma^j_{ki} e_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInput, SingularMetric
from .numerics import DEFAULT_H, QuadratureSpec

GUARD = 1e-3
# nested differences (derivative of a differenced connection) use a wider step
NESTED_H = 1e-4


def _points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise InvalidInput(f"points must have trailing dimension 3, got shape {x.shape}")
    return x


class MetricField:
    """A Riemannian metric g_ij(x, t) on a 3D coordinate chart.

    Subclasses provide :meth:`g` and, where available, analytic :meth:`dg`.
    The default :meth:`dg` differences :meth:`g` with step ``DEFAULT_H``.
    """

    family = "Metric"
    analytic = False

    @property
    def params(self) -> dict:
        return {}

    def g(self, x, t: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def dg(self, x, t: float = 0.0) -> np.ndarray:
        x = _points(x)
        h = DEFAULT_H
        out = np.empty(x.shape[:-1] + (3, 3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            out[..., k, :, :] = (self.g(x + e, t) - self.g(x - e, t)) / (2.0 * h)
        return out

    def checked_g(self, x, t: float = 0.0) -> np.ndarray:
        """Metric components, raising :class:`SingularMetric` unless positive-definite."""
        g = self.g(x, t)
        flat = g.reshape(-1, 3, 3)
        bad = ~np.all(np.isfinite(flat), axis=(1, 2))
        ok = ~bad
        if ok.any():
            lam = np.linalg.eigvalsh(flat[ok])
            scale = np.maximum(np.max(np.abs(lam), axis=-1), 1e-300)
            bad_ok = lam[:, 0] <= 1e-14 * scale
            bad[np.flatnonzero(ok)[bad_ok]] = True
        if bad.any():
            where = np.asarray(x, dtype=float).reshape(-1, 3)
            idx = int(np.argmax(bad))
            pt = where[idx if len(where) > 1 else 0]
            raise SingularMetric(tuple(float(c) for c in pt))
        return g

    def inverse(self, x, t: float = 0.0) -> np.ndarray:
        return np.linalg.inv(self.checked_g(x, t))

    def det(self, x, t: float = 0.0) -> np.ndarray:
        return np.linalg.det(self.g(x, t))

    def d_inverse(self, x, t: float = 0.0) -> np.ndarray:
        """``[..., k, i, j]`` = d_k g^{ij} = -g^{ia} d_k g_ab g^{bj}."""
        ginv = self.inverse(x, t)
        return -np.einsum("...ia,...kab,...bj->...kij", ginv, self.dg(x, t), ginv)

    def snapshot(self, t: float) -> "FrozenMetric":
        """This metric frozen at time ``t`` (time argument ignored afterwards)."""
        return FrozenMetric(self, t)

    def describe(self) -> dict:
        return {"family": self.family, **self.params}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


class EuclideanFlat(MetricField):
    family = "EuclideanFlat"
    analytic = True

    def g(self, x, t=0.0):
        x = _points(x)
        return np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3)).copy()

    def dg(self, x, t=0.0):
        x = _points(x)
        return np.zeros(x.shape[:-1] + (3, 3, 3))


class _Hyperspherical(MetricField):
    """r^2 (dchi^2 + f(chi)^2 (dth^2 + sin^2 th dphi^2)) on coordinates (chi, th, phi)."""

    analytic = True

    def __init__(self, radius: float = 1.0):
        if not radius > 0:
            raise InvalidInput(f"radius must be positive, got {radius}")
        self.radius = float(radius)

    @property
    def params(self):
        return {"radius": self.radius}

    def _radial(self, chi):
        raise NotImplementedError

    def _chi(self, x):
        raise NotImplementedError

    def g(self, x, t=0.0):
        x = _points(x)
        chi, th = self._chi(x), np.clip(x[..., 1], GUARD, np.pi - GUARD)
        f, _ = self._radial(chi)
        r2 = self.radius ** 2
        out = np.zeros(x.shape[:-1] + (3, 3))
        out[..., 0, 0] = r2
        out[..., 1, 1] = r2 * f * f
        out[..., 2, 2] = r2 * f * f * np.sin(th) ** 2
        return out

    def dg(self, x, t=0.0):
        x = _points(x)
        chi, th = self._chi(x), np.clip(x[..., 1], GUARD, np.pi - GUARD)
        f, fp = self._radial(chi)
        r2 = self.radius ** 2
        s, c = np.sin(th), np.cos(th)
        out = np.zeros(x.shape[:-1] + (3, 3, 3))
        out[..., 0, 1, 1] = r2 * 2.0 * f * fp
        out[..., 0, 2, 2] = r2 * 2.0 * f * fp * s * s
        out[..., 1, 2, 2] = r2 * f * f * 2.0 * s * c
        return out


class RoundSphere(_Hyperspherical):
    """Round 3-sphere of the given radius; Ricci = (2 / r^2) g."""

    family = "RoundSphere"

    def _chi(self, x):
        return np.clip(x[..., 0], GUARD, np.pi - GUARD)

    def _radial(self, chi):
        return np.sin(chi), np.cos(chi)

    @property
    def einstein_constant(self) -> float:
        return 2.0 / self.radius ** 2


class HyperbolicSpace(_Hyperspherical):
    """Hyperbolic 3-space of curvature radius r; Ricci = (-2 / r^2) g."""

    family = "HyperbolicSpace"

    def _chi(self, x):
        return np.maximum(x[..., 0], GUARD)

    def _radial(self, chi):
        return np.sinh(chi), np.cosh(chi)

    @property
    def einstein_constant(self) -> float:
        return -2.0 / self.radius ** 2


class ConformalLyapunov(MetricField):
    """g_ij = exp(-2 rate t) delta_ij, spatially constant."""

    family = "ConformalLyapunov"
    analytic = True

    def __init__(self, rate: float):
        self.rate = float(rate)

    @property
    def params(self):
        return {"rate": self.rate}

    def factor(self, t: float) -> float:
        return float(np.exp(-2.0 * self.rate * t))

    def g(self, x, t=0.0):
        x = _points(x)
        return np.broadcast_to(self.factor(t) * np.eye(3), x.shape[:-1] + (3, 3)).copy()

    def dg(self, x, t=0.0):
        x = _points(x)
        return np.zeros(x.shape[:-1] + (3, 3, 3))


class EinsteinScaled(MetricField):
    """``(scale - 2 lam t) * base`` where Ric(base) = lam * base.

    This is the exact Ricci-flow solution starting from ``scale * base``. With
    ``lam`` omitted it is taken from the base family when known.
    """

    family = "EinsteinScaled"

    def __init__(self, base: MetricField, einstein_constant: float | None = None,
                 scale: float = 1.0):
        if einstein_constant is None:
            if isinstance(base, EuclideanFlat):
                einstein_constant = 0.0
            elif hasattr(base, "einstein_constant"):
                einstein_constant = base.einstein_constant
            else:
                raise InvalidInput("einstein_constant is required for this base metric")
        if not scale > 0:
            raise InvalidInput(f"scale must be positive, got {scale}")
        self.base = base
        self.einstein_constant = float(einstein_constant)
        self.scale = float(scale)
        self.analytic = base.analytic

    @property
    def params(self):
        return {"base": self.base.describe(), "einstein_constant": self.einstein_constant,
                "scale": self.scale}

    def factor(self, t: float) -> float:
        return self.scale - 2.0 * self.einstein_constant * t

    def g(self, x, t=0.0):
        return self.factor(t) * self.base.g(x, t)

    def dg(self, x, t=0.0):
        return self.factor(t) * self.base.dg(x, t)


class DiagonalCustom(MetricField):
    """diag(f1(x), f2(x), f3(x)) from three vectorised scalar fields of x (..., 3).

    Derivatives are central differences.
    """

    family = "DiagonalCustom"
    analytic = False

    def __init__(self, f1: Callable, f2: Callable, f3: Callable, labels=None):
        self.fields = (f1, f2, f3)
        self.labels = tuple(labels) if labels is not None else None

    @property
    def params(self):
        if self.labels is not None:
            return {"g11": self.labels[0], "g22": self.labels[1], "g33": self.labels[2]}
        return {"fields": [getattr(f, "__name__", "field") for f in self.fields]}

    def g(self, x, t=0.0):
        x = _points(x)
        out = np.zeros(x.shape[:-1] + (3, 3))
        for i, f in enumerate(self.fields):
            out[..., i, i] = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape[:-1])
        return out


class FrozenMetric(MetricField):
    """Another metric evaluated at a fixed time, whatever time is requested."""

    def __init__(self, inner: MetricField, time: float):
        self.inner = inner
        self.time = float(time)
        self.family = inner.family
        self.analytic = inner.analytic

    @property
    def params(self):
        return {**self.inner.params, "frozen_time": self.time}

    def g(self, x, t=0.0):
        return self.inner.g(x, self.time)

    def dg(self, x, t=0.0):
        return self.inner.dg(x, self.time)


@dataclass(frozen=True)
class Connection:
    """Levi-Civita coefficients at one point; ``gamma[a, b, c]`` = Gamma^a_{bc}."""

    gamma: np.ndarray
    point: tuple
    time: float

    def rotation_coefficient(self, k: int, i: int, j: int) -> float:
        """Coefficient of e_j in d_k e_i."""
        return float(self.gamma[j, k, i])


@dataclass(frozen=True)
class CurvatureReport:
    """Ricci tensor with its trace and pointwise Einstein fit.

    ``residual`` is ||R - lambda_hat g||_F / max(1, ||R||_F); for region reports
    it is the maximum over samples and ``lambda_hat`` the sample mean.
    """

    ricci: np.ndarray
    scalar: float
    lambda_hat: float
    residual: float
    point: tuple | None = None
    time: float = 0.0
    extra: dict = field(default_factory=dict)


def christoffel(m: MetricField, x, t: float = 0.0) -> np.ndarray:
    """Gamma^a_{bc} = 1/2 g^{am} (d_b g_mc + d_c g_mb - d_m g_bc), vectorised."""
    x = _points(x)
    return christoffel_from(m.inverse(x, t), m.dg(x, t))


def christoffel_from(ginv: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Christoffel symbols from precomputed g^{ij} and ``d[..., k, i, j]`` = d_k g_ij."""
    # lower[..., m, b, c] = d_b g_mc + d_c g_mb - d_m g_bc
    lower = np.einsum("...bmc->...mbc", d) + np.einsum("...cmb->...mbc", d) - d
    return 0.5 * np.einsum("...am,...mbc->...abc", ginv, lower)


def connection(m: MetricField, p, t: float = 0.0) -> Connection:
    p = _points(p)
    if p.shape != (3,):
        raise InvalidInput("connection() takes a single point; use christoffel() for arrays")
    return Connection(christoffel(m, p, t), tuple(float(c) for c in p), float(t))


def _default_outer_step(m: MetricField) -> float:
    return DEFAULT_H if m.analytic else NESTED_H


def ricci_tensor(m: MetricField, x, t: float = 0.0, h: float | None = None) -> np.ndarray:
    """R_bd = d_a G^a_db - d_d G^a_ab + G^a_ae G^e_db - G^a_de G^e_ab.

    The connection derivatives are central differences of :func:`christoffel`.
    """
    x = _points(x)
    h = _default_outer_step(m) if h is None else h
    gam = christoffel(m, x, t)
    dgam = np.empty(x.shape[:-1] + (3, 3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        dgam[..., k, :, :, :] = (christoffel(m, x + e, t) - christoffel(m, x - e, t)) / (2.0 * h)
    r = (np.einsum("...aadb->...db", dgam)
         - np.einsum("...daab->...db", dgam)
         + np.einsum("...aae,...edb->...db", gam, gam)
         - np.einsum("...ade,...eab->...db", gam, gam))
    return r


def _einstein_residual(r: np.ndarray, g: np.ndarray, lam) -> np.ndarray:
    lam = np.asarray(lam)[..., None, None]
    num = np.linalg.norm(r - lam * g, axis=(-2, -1))
    return num / np.maximum(1.0, np.linalg.norm(r, axis=(-2, -1)))


def ricci(m: MetricField, p, t: float = 0.0, h: float | None = None) -> CurvatureReport:
    """Pointwise curvature report at a single point."""
    p = _points(p)
    r = ricci_tensor(m, p, t, h)
    ginv = m.inverse(p, t)
    scalar = float(np.einsum("ij,ij->", ginv, r))
    lam = scalar / 3.0
    res = float(_einstein_residual(r, m.g(p, t), lam))
    return CurvatureReport(r, scalar, lam, res, tuple(float(c) for c in p), float(t))


def einstein_fit(m: MetricField, region: QuadratureSpec, t: float = 0.0,
                 h: float | None = None) -> CurvatureReport:
    """Fit R_ij = lam g_ij over the region's sample points.

    ``lambda_hat`` is the mean of R_ij g^{ij} / 3; ``residual`` is the worst
    relative Frobenius residual, with ``point`` the worst sample.
    """
    pts, _ = region.nodes()
    r = ricci_tensor(m, pts, t, h)
    g = m.g(pts, t)
    ginv = np.linalg.inv(g)
    lam_pts = np.einsum("nij,nij->n", ginv, r) / 3.0
    lam = float(np.mean(lam_pts))
    res = _einstein_residual(r, g, lam)
    worst = int(np.argmax(res))
    return CurvatureReport(
        ricci=r[worst], scalar=3.0 * lam, lambda_hat=lam, residual=float(res[worst]),
        point=tuple(float(c) for c in pts[worst]), time=float(t),
        extra={"samples": len(pts), "lambda_spread": float(np.ptp(lam_pts))},
    )


def einstein_check(m: MetricField, region: QuadratureSpec, t: float = 0.0,
                   tol: float = 1e-6) -> float | None:
    """Fitted Einstein constant if the metric is Einstein on ``region`` to ``tol``, else None."""
    report = einstein_fit(m, region, t)
    return report.lambda_hat if report.residual < tol else None


def volume_element(m: MetricField, p, t: float = 0.0):
    """sqrt(det g); vectorised over points."""
    g = m.checked_g(p, t)
    out = np.sqrt(np.linalg.det(g))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    killing_ok: bool
    flow_ok: bool
    killing_residual: float
    flow_residual: float
    killing_worst_point: tuple
    flow_worst_point: tuple

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "killing_ok": self.killing_ok,
            "flow_ok": self.flow_ok,
            "killing_residual": self.killing_residual,
            "flow_residual": self.flow_residual,
            "killing_worst_point": list(self.killing_worst_point),
            "flow_worst_point": list(self.flow_worst_point),
        }


def paper_symmetry_check(m: MetricField, v, region: QuadratureSpec, tol: float = 1e-8,
                         t: float = 0.0) -> SymmetryReport:
    """Check sum_l d_l g^{l3} = 0 and v^l = delta^l_3 on the region's samples.

    ``v`` is anything with a vectorised ``velocity(x)`` method (a
    :class:`~ricci_dynamo.kinematics.VelocityField`).
    """
    pts, _ = region.nodes()
    dinv = m.d_inverse(pts, t)
    div3 = np.abs(np.einsum("nll->n", dinv[..., :, :, 2]))
    vel = np.asarray(v.velocity(pts), dtype=float)
    dev = np.linalg.norm(vel - np.array([0.0, 0.0, 1.0]), axis=-1)
    ki, fi = int(np.argmax(div3)), int(np.argmax(dev))
    k_ok, f_ok = bool(div3[ki] < tol), bool(dev[fi] < tol)
    return SymmetryReport(
        passed=k_ok and f_ok, killing_ok=k_ok, flow_ok=f_ok,
        killing_residual=float(div3[ki]), flow_residual=float(dev[fi]),
        killing_worst_point=tuple(float(c) for c in pts[ki]),
        flow_worst_point=tuple(float(c) for c in pts[fi]),
    )
