"""Velocity fields, covariant velocity gradient, and its vorticity/shear/expansion split.

Sign conventions, kept literal so that every downstream formula holds verbatim:

* covariant gradient ``grad[p, l] = d_p v_l + Gamma^k_{pl} v_k`` (plus sign on
  the connection term; ``convention="levi-civita"`` gives the usual minus);
* expansion ``theta = -g^{pl} grad[p, l]``, so that
  ``grad = Omega + sigma - theta/3 g`` with sigma trace-free. Expanding flows
  therefore have theta < 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInput
from .geometry import MetricField, christoffel_from
from .numerics import DEFAULT_H, as_anti, as_sym, sym_eigen_generalized


class VelocityField:
    """Contravariant velocity v^i(x); vectorised over ``(..., 3)`` points."""

    family = "Velocity"

    @property
    def params(self) -> dict:
        return {}

    def velocity(self, x) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        """``[..., p, i]`` = d_p v^i; central differences unless overridden."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1] + (3, 3))
        for p in range(3):
            e = np.zeros(3)
            e[p] = DEFAULT_H
            out[..., p, :] = (self.velocity(x + e) - self.velocity(x - e)) / (2 * DEFAULT_H)
        return out

    def __call__(self, x):
        return self.velocity(x)

    def describe(self) -> dict:
        return {"family": self.family, **self.params}


class Uniform(VelocityField):
    family = "Uniform"

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float).reshape(3)

    @property
    def params(self):
        return {"value": self.value.tolist()}

    def velocity(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.value, x.shape).copy()

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (3, 3))


class LinearGradient(VelocityField):
    """v^i = A[i, j] x^j."""

    family = "LinearGradient"

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float).reshape(3, 3)

    @property
    def params(self):
        return {"matrix": self.matrix.tolist()}

    def velocity(self, x):
        return np.einsum("ij,...j->...i", self.matrix, np.asarray(x, dtype=float))

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.matrix.T, x.shape[:-1] + (3, 3)).copy()


class RigidRotation(LinearGradient):
    """v = w x x for a constant angular velocity w."""

    family = "RigidRotation"

    def __init__(self, angular_velocity):
        w = np.asarray(angular_velocity, dtype=float).reshape(3)
        self.angular_velocity = w
        super().__init__([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])

    @property
    def params(self):
        return {"angular_velocity": self.angular_velocity.tolist()}


class PaperSteady(Uniform):
    """The steady unit flow v^l = delta^l_3."""

    family = "PaperSteady"

    def __init__(self):
        super().__init__([0.0, 0.0, 1.0])

    @property
    def params(self):
        return {}


class GridSampled(VelocityField):
    """Arbitrary vectorised evaluator; derivatives by central differences."""

    family = "GridSampled"

    def __init__(self, evaluator: Callable, label: str | None = None):
        self.evaluator = evaluator
        self.label = label

    @property
    def params(self):
        return {"evaluator": self.label or getattr(self.evaluator, "__name__", "field")}

    def velocity(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.evaluator(x), dtype=float), x.shape).copy()


def planar_shear(rate: float) -> LinearGradient:
    """v = (rate * x2, 0, 0)."""
    a = np.zeros((3, 3))
    a[0, 1] = rate
    return LinearGradient(a)


def covariant_gradient(v: VelocityField, m: MetricField, p, t: float = 0.0,
                       convention: str = "paper") -> np.ndarray:
    """``grad[..., p, l] = d_p v_l +/- Gamma^k_{pl} v_k`` with v_l = g_lm v^m."""
    return gradient_parts(v, m, p, t, convention)[-1]


def gradient_parts(v: VelocityField, m: MetricField, p, t: float = 0.0,
                   convention: str = "paper"):
    """``(g, g_inv, dg, v_low, grad)`` at ``p``, sharing one metric evaluation."""
    if convention not in ("paper", "levi-civita"):
        raise InvalidInput(f"unknown convention {convention!r}")
    p = np.asarray(p, dtype=float)
    g = m.checked_g(p, t)
    ginv = np.linalg.inv(g)
    dg = m.dg(p, t)
    vu = v.velocity(p)
    v_low = np.einsum("...lm,...m->...l", g, vu)
    d_vlow = (np.einsum("...plm,...m->...pl", dg, vu)
              + np.einsum("...lm,...pm->...pl", g, v.jacobian(p)))
    conn = np.einsum("...kpl,...k->...pl", christoffel_from(ginv, dg), v_low)
    sign = 1.0 if convention == "paper" else -1.0
    return g, ginv, dg, v_low, d_vlow + sign * conn


@dataclass(frozen=True)
class FlowDecomposition:
    """Vorticity, shear, and expansion of a covariant gradient at one point.

    ``metric`` is g_ij at the point, used for all projections. Shear built by
    :func:`decompose` is trace-free; hand-built instances are not validated.
    """

    vorticity: np.ndarray
    shear: np.ndarray
    expansion: float
    gradient: np.ndarray
    metric: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.vorticity + self.shear - self.expansion / 3.0 * self.metric

    @classmethod
    def from_parts(cls, shear, expansion: float = 0.0, vorticity=None, metric=None):
        g = np.eye(3) if metric is None else as_sym(metric)
        om = np.zeros((3, 3)) if vorticity is None else as_anti(vorticity)
        sh = as_sym(shear)
        grad = om + sh - float(expansion) / 3.0 * g
        return cls(om, sh, float(expansion), grad, g)


def decompose(grad, m: MetricField | None = None, p=None, t: float = 0.0,
              metric=None, flip_expansion_sign: bool = False) -> FlowDecomposition:
    """Split ``grad`` into Omega (antisymmetric), sigma (trace-free symmetric), theta.

    The metric comes from ``m`` at ``(p, t)`` or directly from ``metric``
    (identity if neither is given). ``flip_expansion_sign`` deliberately breaks
    the reconstruction identity; it exists only for fault-injection checks.
    """
    grad = np.asarray(grad, dtype=float)
    if grad.shape != (3, 3) or not np.all(np.isfinite(grad)):
        raise InvalidInput("gradient must be a finite 3x3 array")
    if metric is not None:
        g = as_sym(metric)
    elif m is not None:
        g = m.checked_g(np.asarray(p, dtype=float), t)
    else:
        g = np.eye(3)
    ginv = np.linalg.inv(g)
    omega = 0.5 * (grad - grad.T)
    theta = -float(np.einsum("pl,pl->", ginv, grad))
    shear = 0.5 * (grad + grad.T) + theta / 3.0 * g
    if flip_expansion_sign:
        theta = -theta
    return FlowDecomposition(omega, shear, theta, grad, g)


def expansion_tensor(theta: float, metric=None) -> np.ndarray:
    """The expansion part -theta/3 g_ij."""
    g = np.eye(3) if metric is None else np.asarray(metric, dtype=float)
    return -theta / 3.0 * g


def tensor_projection(tensor, B, metric=None) -> float:
    """Rayleigh projection T_pl B^p B^l / (g_pl B^p B^l).

    Equals the eigenvalue when B is an eigendirection of T relative to g; zero
    for any antisymmetric T and real B.
    """
    B = np.asarray(B, dtype=float).reshape(3)
    g = np.eye(3) if metric is None else np.asarray(metric, dtype=float)
    norm2 = float(B @ g @ B)
    if not np.all(np.isfinite(B)) or norm2 <= 0:
        raise InvalidInput("projection direction must be a nonzero finite vector")
    T = np.asarray(tensor, dtype=float)
    return float(B @ T @ B) / norm2


def shear_eigensystem(shear, metric=None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of sigma B = s g B, descending; vectors are g-unit columns."""
    g = np.eye(3) if metric is None else metric
    return sym_eigen_generalized(shear, g)


def vorticity_magnitude(vorticity, metric=None) -> float:
    """sqrt(Omega_pl Omega^pl / 2), the length of the vorticity axial vector."""
    g = np.eye(3) if metric is None else np.asarray(metric, dtype=float)
    ginv = np.linalg.inv(g)
    om = np.asarray(vorticity, dtype=float)
    return float(np.sqrt(0.5 * np.einsum("pl,pa,lb,ab->", om, ginv, ginv, om)))


@dataclass(frozen=True)
class FrameVorticity:
    """Rotation rate omega_pl of the reference frame; ``mode`` is "matched" or "explicit"."""

    omega: np.ndarray
    mode: str


def frame_vorticity(decomp: FlowDecomposition, mode="matched") -> FrameVorticity:
    """Frame rotation either co-rotating with the flow or given explicitly.

    ``mode="matched"`` copies the flow vorticity, so the Omega - omega term of
    the induction equation vanishes. Any array is taken as an explicit
    antisymmetric frame vorticity.
    """
    if isinstance(mode, str):
        if mode != "matched":
            raise InvalidInput(f"unknown frame mode {mode!r}")
        return FrameVorticity(decomp.vorticity.copy(), "matched")
    try:
        om = as_anti(mode)
    except InvalidInput as exc:
        raise InvalidInput(f"explicit frame vorticity must be antisymmetric: {exc}") from None
    return FrameVorticity(om, "explicit")
