"""Oracle cross-check suite run by ``ricci-dynamo verify``.

Every check is deterministic (fixed RNG seed) and returns the worst residual it
saw next to the tolerance it was held to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .energy import (
    MARGINAL,
    FAST,
    DECAYING,
    classify,
    energy_rate,
    energy_rate_numeric,
    magnetic_energy,
    marginal_shear,
)
from .geometry import (
    ConformalLyapunov,
    EinsteinScaled,
    EuclideanFlat,
    HyperbolicSpace,
    RoundSphere,
    christoffel,
    ricci_tensor,
)
from .induction import evolve_B, fast_dynamo_operator, induction_rhs
from .kinematics import (
    FlowDecomposition,
    LinearGradient,
    RigidRotation,
    covariant_gradient,
    decompose,
    planar_shear,
)
from .numerics import QuadratureSpec, box_integrate, integrate, sym_eigen
from .ricci_flow import evolve, frozen_eigenvalue_gap, lyapunov_spectrum, ricci_eigenvalues

SEED = 20240229
FAULTS = ("theta_sign",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "residual": self.residual,
                "tolerance": self.tolerance, "detail": self.detail}


def _result(name, residual, tol, detail="", passed=None):
    residual = float(residual)
    ok = bool(residual < tol) if passed is None else bool(passed)
    return CheckResult(name, ok, residual, float(tol), detail)


def _sphere_points(rng, n):
    return np.column_stack([rng.uniform(0.3, np.pi - 0.3, n), rng.uniform(0.3, np.pi - 0.3, n),
                            rng.uniform(0.0, 2 * np.pi, n)])


def check_sym_eigen(rng) -> list[CheckResult]:
    recon, tr, det = 0.0, 0.0, 0.0
    for _ in range(1000):
        a = rng.uniform(-10, 10, (3, 3))
        a = 0.5 * (a + a.T)
        vals, vecs = sym_eigen(a)
        rebuilt = (vecs * vals) @ vecs.T
        recon = max(recon, np.linalg.norm(rebuilt - a) / np.linalg.norm(a))
        tr = max(tr, abs(vals.sum() - np.trace(a)) / max(abs(np.trace(a)), 1.0))
        d = np.linalg.det(a)
        det = max(det, abs(np.prod(vals) - d) / max(abs(d), 1.0))
    return [_result("sym_eigen_reconstruction", recon, 1e-10),
            _result("sym_eigen_trace_det", max(tr, det), 1e-9)]


def check_ode() -> list[CheckResult]:
    _, ys = integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0, 1e-3)
    return [_result("rk4_exponential_decay", abs(ys[-1, 0] - np.exp(-1.0)), 1e-9)]


def check_quadrature() -> list[CheckResult]:
    def f(x):
        return np.sin(x[:, 0]) * np.cos(x[:, 1]) * np.exp(x[:, 2])
    exact = (1 - np.cos(1.0)) * np.sin(1.0) * (np.e - 1)
    e1 = abs(box_integrate(f, QuadratureSpec.cube(0, 1, 8)) - exact)
    e2 = abs(box_integrate(f, QuadratureSpec.cube(0, 1, 16)) - exact)
    ratio = e1 / e2
    return [_result("quadrature_order", ratio, 3.5, f"error ratio {ratio:.3f} on mesh halving",
                    passed=ratio >= 3.5)]


def check_curvature(rng) -> list[CheckResult]:
    pts = _sphere_points(rng, 50)
    worst = 0.0
    for r in (0.5, 1.0, 2.0):
        for m, lam in ((RoundSphere(r), 2 / r ** 2), (HyperbolicSpace(r), -2 / r ** 2)):
            R = ricci_tensor(m, pts)
            target = lam * m.g(pts)
            rel = np.linalg.norm(R - target, axis=(1, 2)) / np.linalg.norm(target, axis=(1, 2))
            worst = max(worst, float(rel.max()))
    return [_result("curvature_constant_families", worst, 1e-5)]


def _builtin_metrics():
    return [
        (EuclideanFlat(), "box"),
        (RoundSphere(1.3), "sphere"),
        (HyperbolicSpace(0.7), "sphere"),
        (ConformalLyapunov(0.4).snapshot(0.3), "box"),
        (EinsteinScaled(RoundSphere(1.0), scale=2.5), "sphere"),
    ]


def check_metric_compatibility(rng) -> list[CheckResult]:
    worst, sym = 0.0, 0.0
    h = 1e-5
    for m, kind in _builtin_metrics():
        pts = _sphere_points(rng, 200) if kind == "sphere" else rng.uniform(-1, 1, (200, 3))
        gam = christoffel(m, pts)
        g = m.g(pts)
        dg = np.stack([(m.g(pts + h * e) - m.g(pts - h * e)) / (2 * h) for e in np.eye(3)], axis=1)
        cov = dg - np.einsum("nmki,nmj->nkij", gam, g) - np.einsum("nmkj,nim->nkij", gam, g)
        scale = np.maximum(1.0, np.abs(g).max(axis=(1, 2)))
        worst = max(worst, float((np.abs(cov).max(axis=(1, 2, 3)) / scale).max()))
        R = ricci_tensor(m, pts[:40])
        sym = max(sym, float(np.abs(R - R.swapaxes(1, 2)).max()))
    return [_result("metric_compatibility", worst, 1e-6),
            _result("ricci_symmetry", sym, 1e-9)]


def check_scale_law(rng) -> list[CheckResult]:
    pts = _sphere_points(rng, 30)
    worst = 0.0
    for base in (RoundSphere(1.0), HyperbolicSpace(1.5)):
        r0 = ricci_tensor(base, pts)
        for c in (0.3, 2.0, 7.5):
            rc = ricci_tensor(EinsteinScaled(base, scale=c), pts)
            worst = max(worst, float(np.abs(rc - r0).max()))
    return [_result("ricci_scale_invariance", worst, 1e-8)]


def check_flow() -> list[CheckResult]:
    worst = 0.0
    for m, t1 in ((RoundSphere(1.0), 0.1), (HyperbolicSpace(1.0), 0.1), (RoundSphere(2.0), 0.4)):
        traj = evolve(m, (0.0, t1), 1e-3)
        exact = traj.closed_form_scale()
        worst = max(worst, float(np.max(np.abs(traj.scales - exact) / np.abs(exact))))
    # the bound holds for lam t >= 0 only; the cubic term breaks it for lam t < 0
    gap_excess = max(frozen_eigenvalue_gap(x, 1.0) - 2 * x * x for x in np.linspace(0.0, 0.2, 81))
    neg = max(frozen_eigenvalue_gap(x, 1.0) - 2 * x * x for x in np.linspace(-0.1, 0.0, 41))
    return [_result("einstein_flow_exact", worst, 1e-8),
            _result("frozen_eigenvalue_gap", gap_excess, 0.0,
                    f"max(gap - 2 (lam t)^2) on [0, 0.2]; {neg:.3g} on [-0.1, 0]",
                    passed=gap_excess <= 0.0)]


def check_lyapunov() -> list[CheckResult]:
    p = np.array([1.1, 0.9, 0.4])
    out = []
    worst = 0.0
    flags_ok = True
    for m, expected, flag in ((EuclideanFlat(), 0.0, True), (RoundSphere(1.0), -2.0, False),
                              (HyperbolicSpace(1.0), 2.0, True)):
        spec = lyapunov_spectrum(ricci_eigenvalues(m, p))
        worst = max(worst, float(np.abs(spec.exponents - expected).max()))
        worst = max(worst, float(np.abs(spec.exponents + spec.eigenvalues).max()))
        flags_ok &= all(f == flag for f in spec.sign_condition)
    out.append(_result("lyapunov_exponents", worst, 1e-7))
    out.append(_result("lyapunov_sign_flags", 0.0 if flags_ok else 1.0, 0.5))
    return out


def check_decomposition(rng, fault: str | None) -> list[CheckResult]:
    flip = fault == "theta_sign"
    recon, trace = 0.0, 0.0
    for k in range(500):
        A = rng.uniform(-2, 2, (3, 3))
        v = LinearGradient(A)
        if k % 2:
            m, p = RoundSphere(1.0), _sphere_points(rng, 1)[0]
        else:
            m, p = EuclideanFlat(), rng.uniform(-1, 1, 3)
        grad = covariant_gradient(v, m, p)
        d = decompose(grad, m, p, flip_expansion_sign=flip)
        scale = max(1.0, float(np.abs(grad).max()))
        recon = max(recon, float(np.abs(d.reconstruct() - grad).max()) / scale)
        trace = max(trace, abs(float(np.einsum("pl,pl->", np.linalg.inv(d.metric), d.shear))) / scale)
    sign = 0.0
    for c in (-2.0, -1.0, 1.0, 2.0):
        d = decompose(covariant_gradient(LinearGradient(c * np.eye(3)), EuclideanFlat(), np.zeros(3)),
                      flip_expansion_sign=flip)
        sign = max(sign, abs(d.expansion + 3 * c))
    return [_result("decomposition_reconstruction", recon, 1e-10),
            _result("shear_trace_free", trace, 1e-10),
            _result("expansion_sign_convention", sign, 1e-12)]


def check_induction_forms(rng) -> list[CheckResult]:
    worst = 0.0
    for k in range(200):
        v = LinearGradient(rng.uniform(-2, 2, (3, 3)))
        if k % 2:
            m, p = RoundSphere(1.0), _sphere_points(rng, 1)[0]
        else:
            m, p = EuclideanFlat(), rng.uniform(-1, 1, 3)
        B = rng.uniform(-1, 1, 3)
        full = induction_rhs(B, v, m, "matched", p, form="full")
        rigid = induction_rhs(B, v, m, "matched", p, form="rigid")
        worst = max(worst, float(np.abs(full - rigid).max()) / max(1.0, float(np.abs(full).max())))
    return [_result("induction_form_agreement", worst, 1e-10)]


def check_growth() -> list[CheckResult]:
    flat = EuclideanFlat()
    p = np.array([0.2, -0.1, 0.3])
    out = []
    tr = evolve_B([1.0, 0.0, 0.0], LinearGradient(np.eye(3)), flat, "matched", (0, 1), 1e-3, p=p)
    out.append(_result("growth_uniform_expansion", abs(tr.growth_rate - 1.0), 1e-6,
                       f"predicted {tr.predicted['without_vorticity']:.12g}"))
    d = decompose(np.eye(3))
    res = fast_dynamo_operator(tr.times, tr.B, d)
    out.append(_result("fast_dynamo_operator_eigenmode", res.max_relative, 1e-6))
    wrong = np.exp(2 * tr.times)[:, None] * np.array([1.0, 0.0, 0.0])
    bad = fast_dynamo_operator(tr.times, wrong, d)
    rel = float(np.median(bad.relative))
    out.append(_result("fast_dynamo_operator_wrong_rate", abs(rel - 1.0), 0.05,
                       f"median relative residual {rel:.6f}"))
    b = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    tr = evolve_B(b, planar_shear(2.0), flat, "matched", (0, 1), 1e-3, p=p)
    out.append(_result("growth_planar_shear", abs(tr.growth_rate - 1.0), 1e-5))
    tr = evolve_B([0.3, -0.5, 0.8], RigidRotation([0.0, 0.0, 1.0]), flat, "matched", (0, 1), 1e-3, p=p)
    out.append(_result("growth_rigid_rotation", abs(tr.growth_rate), 1e-8))
    return out


class _Scn:
    def __init__(self, **kw):
        self.__dict__.update(kw)


def check_energy() -> list[CheckResult]:
    out = []
    unit = QuadratureSpec.cube(0.0, 1.0, 4)
    flat = EuclideanFlat()
    eps = magnetic_energy([1.0, 0.0, 0.0], flat, unit)
    out.append(_result("energy_flat_unit_box", abs(eps - 1.0), 1e-9))
    lam, t = 1.0, 1.0
    eps = magnetic_energy([1.0, 0.0, 0.0], ConformalLyapunov(lam), unit, t)
    out.append(_result("energy_conformal_lyapunov", abs(eps - np.exp(-5 * lam * t)), 1e-6))

    worst = 0.0
    for om, th, L in ((0.0, 0.0, 2.0), (4.0, 0.0, 0.0), (1.0, -3.0, 0.5), (-2.0, 1.5, -1.0)):
        sig = marginal_shear(om, th, L)
        d = FlowDecomposition.from_parts(sig, th)
        B = [0.3, 0.4, 1.2]
        e = magnetic_energy(B, flat, unit)
        rate = energy_rate(d, B, flat, unit, variant="eq29chain", einstein_constant=L,
                           vorticity_scalar=om)
        worst = max(worst, abs(rate) / e)
        sig_s = float(np.asarray(B) @ sig @ np.asarray(B)) / float(np.dot(B, B))
        if classify(sig_s, om, th, L).classification != MARGINAL:
            worst = max(worst, 1.0)
        if classify(sig_s + 1e-3, om, th, L).classification != FAST:
            worst = max(worst, 1.0)
        if classify(sig_s - 1e-3, om, th, L).classification != DECAYING:
            worst = max(worst, 1.0)
    out.append(_result("marginal_closure_and_flips", worst, 1e-9))

    worst = 0.0
    region = QuadratureSpec.cube(-0.5, 0.5, 3)
    b = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    for v, B in ((planar_shear(2.0), b), (LinearGradient(np.diag([1.0, -1.0, 0.0])), [1.0, 0.0, 0.0]),
                 (LinearGradient(np.diag([0.5, 0.5, -1.0])), [0.0, 0.0, 1.0])):
        closed = energy_rate(v, B, flat, region, variant="eq27")
        scn = _Scn(metric=flat, velocity=v, field=B, frame="matched", region=region, t0=0.0)
        numeric = energy_rate_numeric(scn)
        worst = max(worst, abs(closed - numeric) / abs(numeric))
    out.append(_result("flat_energy_rate_oracle", worst, 2e-3))

    sphere = RoundSphere(1.0)
    region = QuadratureSpec((0.6, 0.6, 0.0), (1.2, 1.2, 1.0), (4, 4, 2))
    zero = FlowDecomposition.from_parts(np.zeros((3, 3)))
    B = [1.0, 0.0, 0.0]
    e = magnetic_energy(B, sphere, region)
    r29 = energy_rate(zero, B, sphere, region, variant="eq29chain")
    r27 = energy_rate(zero, B, sphere, region, variant="eq27")
    ratio = r27 / r29
    out.append(_result("eq27_eq29_discrepancy_ratio", abs(ratio + 2.0), 1e-3,
                       f"eq29 {r29 / e:.9g} eps, eq27 {r27 / e:.9g} eps"))
    return out


SUITE: tuple[tuple[str, Callable], ...] = (
    ("numerics", lambda rng, fault: check_sym_eigen(rng) + check_ode() + check_quadrature()),
    ("geometry", lambda rng, fault: check_curvature(rng) + check_metric_compatibility(rng)
        + check_scale_law(rng)),
    ("ricci_flow", lambda rng, fault: check_flow() + check_lyapunov()),
    ("kinematics", lambda rng, fault: check_decomposition(rng, fault)),
    ("induction", lambda rng, fault: check_induction_forms(rng) + check_growth()),
    ("energy", lambda rng, fault: check_energy()),
)


def run_suite(fault: str | None = None, modules=None) -> list[CheckResult]:
    """Run every check (or those of ``modules``); ``fault`` injects a deliberate bug."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}; expected one of {FAULTS}")
    results = []
    for name, fn in SUITE:
        if modules is not None and name not in modules:
            continue
        rng = np.random.default_rng(SEED)
        results.extend(fn(rng, fault))
    return results
