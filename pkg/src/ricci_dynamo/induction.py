"""Zero-resistivity induction equation, mode growth rates, and the fast dynamo operator.

The field is integrated pointwise at fixed sample points (comoving description:
no v . grad B transport term), as amplitudes B^i(t) of contravariant components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentFrame, InvalidInput
from .geometry import MetricField
from .kinematics import (
    FlowDecomposition,
    FrameVorticity,
    VelocityField,
    covariant_gradient,
    decompose,
    gradient_parts,
    tensor_projection,
)
from .numerics import integrate

FORMS = ("full", "rigid")


@dataclass(frozen=True)
class MagneticState:
    """Contravariant components B^i at one or more points, at a given time."""

    components: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.components, dtype=float)
        if b.shape[-1:] != (3,) or not np.all(np.isfinite(b)):
            raise InvalidInput("magnetic state must be finite with trailing dimension 3")
        object.__setattr__(self, "components", b)


@dataclass(frozen=True)
class MagneticMode:
    """B^i = amplitude * exp(growth_rate t + i wavevector . x).

    The phase is carried as metadata; :meth:`amplitude_at` is the real envelope.
    """

    amplitude: np.ndarray
    growth_rate: float
    wavevector: np.ndarray

    def __post_init__(self):
        if not np.any(np.asarray(self.amplitude) != 0):
            raise InvalidInput("a mode needs a nonzero amplitude")

    def amplitude_at(self, t: float) -> np.ndarray:
        return np.asarray(self.amplitude, dtype=float) * np.exp(self.growth_rate * t)

    def at(self, x, t: float) -> np.ndarray:
        phase = np.exp(1j * float(np.dot(self.wavevector, np.asarray(x, dtype=float))))
        return self.amplitude_at(t) * phase


def _components(B) -> np.ndarray:
    if isinstance(B, MagneticState):
        return B.components
    b = np.asarray(B, dtype=float)
    if b.shape[-1:] != (3,):
        raise InvalidInput("magnetic field must have trailing dimension 3")
    return b


def _frame_omega(fv, grad: np.ndarray) -> tuple[np.ndarray, bool]:
    """(omega, matched) for a frame given as "matched", FrameVorticity or array."""
    if isinstance(fv, str):
        if fv != "matched":
            raise InvalidInput(f"unknown frame mode {fv!r}")
        return 0.5 * (grad - np.swapaxes(grad, -1, -2)), True
    if isinstance(fv, FrameVorticity):
        if fv.mode == "matched":
            return 0.5 * (grad - np.swapaxes(grad, -1, -2)), True
        return fv.omega, False
    om = np.asarray(fv, dtype=float)
    if om.shape[-2:] != (3, 3) or np.max(np.abs(om + np.swapaxes(om, -1, -2))) > 1e-12:
        raise InvalidInput("explicit frame vorticity must be antisymmetric 3x3")
    return om, False


def induction_rhs(B, v: VelocityField, m: MetricField, fv, p, t: float = 0.0,
                  form: str = "full") -> np.ndarray:
    """dB^i/dt in the frame-expanded form.

    ``form="full"``:  B^p [d_p(g^il) v_l + g^il (grad_pl - omega_pl)]
    ``form="rigid"``: B^p [d_p(g^il) v_l + g^il (sigma_pl - theta/3 g_lp)]

    The rigid form assumes the frame co-rotates with the flow and raises
    :class:`InconsistentFrame` for an explicit frame vorticity that does not.
    Vectorised over matching leading axes of ``B`` and ``p``.
    """
    if form not in FORMS:
        raise InvalidInput(f"unknown induction form {form!r}")
    b = _components(B)
    _, ginv, dg, v_low, grad = gradient_parts(v, m, p, t)
    d_inv = -np.einsum("...ia,...kab,...bj->...kij", ginv, dg, ginv)
    metric_term = np.einsum("...pil,...l->...pi", d_inv, v_low)
    omega, matched = _frame_omega(fv, grad)
    if form == "full":
        inner = grad - omega
    else:
        if not matched:
            flow_om = 0.5 * (grad - np.swapaxes(grad, -1, -2))
            scale = max(1.0, float(np.max(np.abs(flow_om))))
            if np.max(np.abs(omega - flow_om)) > 1e-10 * scale:
                raise InconsistentFrame("rigid-rotation form needs frame vorticity equal to the flow's")
        # sigma - theta/3 g is the symmetric part of the gradient
        inner = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    return np.einsum("...p,...pi->...i", b, metric_term + np.einsum("...il,...pl->...pi", ginv, inner))


def mode_growth_rate(d: FlowDecomposition, B, include_vorticity: bool = False,
                     wavevector=None) -> float:
    """gamma = sigma + [Omega] - theta/3 with sigma, Omega projected along B.

    ``wavevector`` is accepted for symmetry with :class:`MagneticMode` and has
    no effect: the growth rate does not depend on the phase.
    """
    sigma = tensor_projection(d.shear, B, d.metric)
    gamma = sigma - d.expansion / 3.0
    if include_vorticity:
        gamma += tensor_projection(d.vorticity, B, d.metric)
    return float(gamma)


def magnetic_mode(d: FlowDecomposition, B0, wavevector=(0.0, 0.0, 0.0),
                  include_vorticity: bool = False) -> MagneticMode:
    gamma = mode_growth_rate(d, B0, include_vorticity, wavevector)
    return MagneticMode(np.asarray(B0, dtype=float), gamma, np.asarray(wavevector, dtype=float))


@dataclass(frozen=True)
class OperatorResidual:
    """Residual (d/dt - [sigma - theta/3 + omega]) B at interior samples."""

    times: np.ndarray
    residual: np.ndarray
    relative: np.ndarray
    bracket: float

    @property
    def max_relative(self) -> float:
        return float(np.max(self.relative))


def fast_dynamo_operator(times, B_samples, d: FlowDecomposition, B=None,
                         frame: FrameVorticity | None = None) -> OperatorResidual:
    """Apply the fast dynamo operator to a sampled field history.

    d/dt is a central difference; the bracket scalars are projections along
    ``B`` (default: the first sample). The frame term uses ``frame`` if given,
    otherwise the flow vorticity (matched frame).
    """
    times = np.asarray(times, dtype=float)
    Bs = np.asarray(B_samples, dtype=float)
    if len(times) < 3 or Bs.shape != (len(times), 3):
        raise InvalidInput("need at least three samples of a 3-vector field")
    direction = Bs[0] if B is None else np.asarray(B, dtype=float)
    omega = d.vorticity if frame is None else frame.omega
    bracket = (tensor_projection(d.shear, direction, d.metric) - d.expansion / 3.0
               + tensor_projection(omega, direction, d.metric))
    dBdt = (Bs[2:] - Bs[:-2]) / (times[2:] - times[:-2])[:, None]
    res = dBdt - bracket * Bs[1:-1]
    g = d.metric
    norm = np.sqrt(np.einsum("ni,ij,nj->n", Bs[1:-1], g, Bs[1:-1]))
    rnorm = np.sqrt(np.abs(np.einsum("ni,ij,nj->n", res, g, res)))
    return OperatorResidual(times[1:-1], res, rnorm / norm, float(bracket))


@dataclass
class BTrajectory:
    """Field history at fixed sample point(s) with the fitted growth rate."""

    times: np.ndarray
    B: np.ndarray
    point: np.ndarray
    norms: np.ndarray
    growth_rate: float | np.ndarray
    predicted: dict = field(default_factory=dict)

    def running_rate(self) -> np.ndarray:
        """Instantaneous d ln||B|| / dt along the trajectory."""
        return np.gradient(np.log(self.norms), self.times, axis=0)


def fit_growth_rate(times, norms) -> float | np.ndarray:
    """Least-squares slope of ln||B|| over the second half of the samples."""
    times = np.asarray(times, dtype=float)
    logs = np.log(np.asarray(norms, dtype=float))
    half = len(times) // 2
    tt = times[half:]
    yy = logs[half:]
    tc = tt - tt.mean()
    slope = np.tensordot(tc, yy - yy.mean(axis=0), axes=(0, 0)) / float(tc @ tc)
    return float(slope) if np.ndim(slope) == 0 else slope


def evolve_B(B0, v: VelocityField, m: MetricField, fv, t_span, dt: float, p=None,
             form: str = "full") -> BTrajectory:
    """RK4-integrate the induction equation at fixed point(s) ``p``.

    ``B0`` and ``p`` may carry matching leading axes to evolve several points at
    once. Predictions from :func:`mode_growth_rate` (with and without the
    vorticity term) are attached for a single point.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    b0 = _components(B0)
    p = np.zeros(b0.shape) if p is None else np.broadcast_to(np.asarray(p, dtype=float), b0.shape)

    def rhs(t, y):
        return induction_rhs(y.reshape(b0.shape), v, m, fv, p, t, form).ravel()

    times, states = integrate(rhs, b0.ravel(), t0, t1, dt)
    Bs = states.reshape((len(times),) + b0.shape)
    gs = np.array([m.g(p, t) for t in times])
    norms = np.sqrt(np.einsum("n...i,n...ij,n...j->n...", Bs, gs, Bs))
    predicted = {}
    if b0.shape == (3,) and np.any(b0 != 0):
        d = decompose(covariant_gradient(v, m, p, t0), metric=m.g(p, t0))
        predicted = {
            "with_vorticity": mode_growth_rate(d, b0, include_vorticity=True),
            "without_vorticity": mode_growth_rate(d, b0, include_vorticity=False),
        }
    with np.errstate(divide="ignore"):
        rate = fit_growth_rate(times, norms) if np.all(norms > 0) else float("nan")
    return BTrajectory(times, Bs, p, norms, rate, predicted)
