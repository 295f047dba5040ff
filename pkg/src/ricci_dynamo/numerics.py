"""Numerical kernels: 3x3 symmetric eigensolver, RK4, box quadrature, central differences.

Symmetric and antisymmetric 3x3 tensors are carried as plain ``(3, 3)`` numpy
arrays; :func:`as_sym` and :func:`as_anti` validate them at module boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInput, NumericalBlowup

DEFAULT_H = 1e-5

_EPS = np.finfo(float).eps


def as_sym(t, atol: float = 1e-12) -> np.ndarray:
    """Return ``t`` as a float (3, 3) array, checking symmetry."""
    a = np.asarray(t, dtype=float)
    if a.shape != (3, 3):
        raise InvalidInput(f"expected a 3x3 tensor, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("tensor has non-finite components")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > atol * scale:
        raise InvalidInput("tensor is not symmetric")
    return 0.5 * (a + a.T)


def as_anti(t, atol: float = 1e-12) -> np.ndarray:
    """Return ``t`` as a float (3, 3) array, checking antisymmetry."""
    a = np.asarray(t, dtype=float)
    if a.shape != (3, 3):
        raise InvalidInput(f"expected a 3x3 tensor, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("tensor has non-finite components")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a + a.T)) > atol * scale:
        raise InvalidInput("tensor is not antisymmetric")
    return 0.5 * (a - a.T)


def sym_from_components(c11, c12, c13, c22, c23, c33) -> np.ndarray:
    return np.array([[c11, c12, c13], [c12, c22, c23], [c13, c23, c33]], dtype=float)


def sym_components(t) -> np.ndarray:
    """The six independent components (11, 12, 13, 22, 23, 33) of a symmetric tensor."""
    a = np.asarray(t, dtype=float)
    return np.array([a[..., 0, 0], a[..., 0, 1], a[..., 0, 2],
                     a[..., 1, 1], a[..., 1, 2], a[..., 2, 2]]).T


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = a.copy()
    v = np.eye(3)
    for _ in range(50):
        off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
        if off <= (_EPS * _EPS) * float(np.sum(a * a)) or off == 0.0:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if abs(apq) <= 1e-300 * max(1.0, abs(a[q, q] - a[p, p])):
                a[p, q] = a[q, p] = 0.0
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    return np.diag(a).copy(), v


def _canonical_vectors(vals: np.ndarray, vecs: np.ndarray, tol: float,
                       weight: np.ndarray | None = None) -> np.ndarray:
    """Deterministic eigenvector choice: axis Gram-Schmidt inside degenerate clusters.

    ``vecs`` columns are orthonormal in the inner product ``weight`` (identity
    when None). Isolated vectors get their largest component made positive.
    """
    w = np.eye(3) if weight is None else weight
    out = vecs.copy()
    i = 0
    while i < 3:
        j = i + 1
        while j < 3 and abs(vals[j] - vals[i]) <= tol:
            j += 1
        if j - i > 1:
            span = vecs[:, i:j]
            basis: list[np.ndarray] = []
            for axis in np.eye(3):
                u = span @ (span.T @ (w @ axis))
                for b in basis:
                    u = u - (b @ w @ u) * b
                n = math.sqrt(max(float(u @ w @ u), 0.0))
                if n > 1e-8:
                    basis.append(u / n)
                if len(basis) == j - i:
                    break
            out[:, i:j] = np.array(basis).T
        else:
            col = out[:, i]
            k = int(np.argmax(np.abs(col)))
            if col[k] < 0:
                out[:, i] = -col
        i = j
    return out


def sym_eigen(t, cluster_tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric 3x3 tensor by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values in descending order and the
    orthonormal eigenvectors as the *columns* of ``vectors``. Eigenvalues
    closer than ``cluster_tol`` (default 1e-12 ||t||) count as degenerate; their
    vectors are the Gram-Schmidt projections of the coordinate axes taken in
    order, so diagonal input returns axes.
    """
    a = as_sym(t, atol=1e-9)
    vals, vecs = _jacobi(a)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    if cluster_tol is None:
        cluster_tol = 1e-12 * float(np.linalg.norm(a))
    return vals, _canonical_vectors(vals, vecs, cluster_tol)


def sym_eigen_generalized(a, g, cluster_tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``a x = s g x`` for symmetric ``a`` and positive-definite ``g``.

    Eigenvectors are returned as columns, normalised so that ``x.T @ g @ x = I``;
    degenerate clusters (within ``cluster_tol``) get the g-orthonormalised axes.
    """
    a = as_sym(a, atol=1e-9)
    g = as_sym(g, atol=1e-9)
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise InvalidInput("weight tensor is not positive-definite") from exc
    linv = np.linalg.inv(chol)
    reduced = linv @ a @ linv.T
    vals, y = sym_eigen(0.5 * (reduced + reduced.T), cluster_tol=0.0)
    if cluster_tol is None:
        cluster_tol = 1e-12 * float(np.linalg.norm(reduced))
    return vals, _canonical_vectors(vals, linv.T @ y, cluster_tol, weight=g)


def ode_step(state, rhs: Callable, t: float, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of ``dy/dt = rhs(t, y)``."""
    if not dt > 0:
        raise InvalidInput(f"time step must be positive, got {dt}")
    y = np.asarray(state, dtype=float)
    k1 = np.asarray(rhs(t, y), dtype=float)
    k2 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(rhs(t + dt, y + dt * k3), dtype=float)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowup(t + dt)
    return out


def integrate(rhs: Callable, y0, t0: float, t1: float, dt: float,
              callback: Callable | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step RK4 from ``t0`` to ``t1`` (either direction).

    The step is ``|t1 - t0| / n`` with ``n = ceil(|t1 - t0| / dt)``, so the
    last sample lands on ``t1``. ``callback(t, y)`` runs after every step.
    Returns ``(times, states)``.
    """
    if not dt > 0:
        raise InvalidInput(f"time step must be positive, got {dt}")
    span = float(t1) - float(t0)
    n = max(1, int(math.ceil(abs(span) / dt - 1e-9))) if span != 0 else 0
    y = np.asarray(y0, dtype=float)
    times = [float(t0)]
    states = [y]
    if n == 0:
        return np.array(times), np.array(states)
    h = abs(span) / n
    sign = 1.0 if span > 0 else -1.0
    if sign > 0:
        step_rhs = rhs
    else:
        def step_rhs(s, z):
            return -np.asarray(rhs(2.0 * t0 - s, z))
    s = float(t0)
    for k in range(n):
        y = ode_step(y, step_rhs, s, h)
        s = float(t0) + (k + 1) * h
        t = float(t0) + sign * (k + 1) * h
        if callback is not None:
            callback(t, y)
        times.append(t)
        states.append(y)
    times[-1] = float(t1)
    return np.array(times), np.array(states)


@dataclass(frozen=True)
class QuadratureSpec:
    """Axis-aligned box with per-axis sample counts and a tensor-product rule."""

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]
    counts: tuple[int, int, int]
    rule: str = "midpoint"

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        n = tuple(int(x) for x in self.counts)
        if len(lo) != 3 or len(hi) != 3 or len(n) != 3:
            raise InvalidInput("quadrature box needs three bounds and three counts")
        if self.rule not in ("midpoint", "trapezoid"):
            raise InvalidInput(f"unknown quadrature rule {self.rule!r}")
        if any(not (a < b) for a, b in zip(lo, hi)):
            raise InvalidInput("quadrature bounds must satisfy lower < upper")
        minimum = 2 if self.rule == "trapezoid" else 1
        if any(k < minimum for k in n):
            raise InvalidInput(f"{self.rule} rule needs at least {minimum} samples per axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "counts", n)

    @classmethod
    def cube(cls, lower: float, upper: float, n: int, rule: str = "midpoint") -> "QuadratureSpec":
        return cls((lower,) * 3, (upper,) * 3, (n,) * 3, rule)

    def axis_nodes(self, axis: int) -> tuple[np.ndarray, np.ndarray]:
        a, b, n = self.lower[axis], self.upper[axis], self.counts[axis]
        if self.rule == "midpoint":
            h = (b - a) / n
            return a + h * (np.arange(n) + 0.5), np.full(n, h)
        x = np.linspace(a, b, n)
        w = np.full(n, (b - a) / (n - 1))
        w[0] = w[-1] = 0.5 * (b - a) / (n - 1)
        return x, w

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Tensor-product nodes ``(n, 3)`` and weights ``(n,)``."""
        xs, ws = zip(*(self.axis_nodes(k) for k in range(3)))
        grid = np.stack(np.meshgrid(*xs, indexing="ij"), axis=-1).reshape(-1, 3)
        w = np.einsum("i,j,k->ijk", *ws).reshape(-1)
        return grid, w

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))


def box_integrate(f: Callable, q: QuadratureSpec) -> float:
    """Integrate ``f`` over the box of ``q``.

    ``f`` is called once with an ``(n, 3)`` array of nodes and must return
    ``n`` values (wrap scalar functions with :func:`pointwise`).
    """
    pts, w = q.nodes()
    vals = np.asarray(f(pts), dtype=float)
    if vals.ndim == 0:
        vals = np.full(len(pts), float(vals))
    vals = vals.reshape(len(pts))
    bad = ~np.isfinite(vals)
    if bad.any():
        raise InvalidInput(f"non-finite integrand at grid point {tuple(pts[np.argmax(bad)])}")
    return float(np.sum(w * vals))


def pointwise(f: Callable) -> Callable:
    """Lift a function of a single 3-point to one over an ``(n, 3)`` array."""
    def lifted(pts):
        pts = np.asarray(pts, dtype=float)
        return np.array([f(p) for p in pts.reshape(-1, 3)]).reshape(pts.shape[:-1])
    return lifted


def fd_partial(f: Callable, p: Sequence[float] | np.ndarray, axis: int,
               h: float = DEFAULT_H):
    """Second-order central difference of ``f`` along coordinate ``axis`` (0-based).

    ``p`` may be a single point or a ``(..., 3)`` array when ``f`` is vectorised;
    ``f`` may return scalars or arrays.
    """
    if not h > 0:
        raise InvalidInput(f"difference step must be positive, got {h}")
    p = np.asarray(p, dtype=float)
    e = np.zeros(3)
    e[axis] = h
    fp = np.asarray(f(p + e), dtype=float)
    fm = np.asarray(f(p - e), dtype=float)
    if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
        raise InvalidInput(f"non-finite evaluation near {p.tolist()} along axis {axis}")
    return (fp - fm) / (2.0 * h)
