from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ricci_dynamo.energy import (
    DECAYING,
    FAST,
    MARGINAL,
    EnergyReport,
    classify,
    dynamo_margin,
    energy_rate,
    energy_rate_numeric,
    eq29_integrand,
    magnetic_energy,
    marginal_shear,
    variants_diverge,
)
from ricci_dynamo.errors import InvalidInput, NotEinstein
from ricci_dynamo.geometry import ConformalLyapunov, DiagonalCustom, EuclideanFlat, RoundSphere
from ricci_dynamo.kinematics import FlowDecomposition, LinearGradient, Uniform, planar_shear
from ricci_dynamo.numerics import QuadratureSpec

FLAT = EuclideanFlat()
UNIT = QuadratureSpec.cube(0.0, 1.0, 4)
CENTRED = QuadratureSpec.cube(-0.5, 0.5, 3)
SPHERE_REGION = QuadratureSpec((0.5, 0.5, 0.0), (1.0, 1.0, 1.0), (6, 6, 4))
ZERO = Uniform([0.0, 0.0, 0.0])


def scenario(**kw):
    base = dict(metric=FLAT, frame="matched", region=CENTRED, t0=0.0, evolve_metric=False)
    base.update(kw)
    return SimpleNamespace(**base)


def test_energy_flat_unit_box():
    assert magnetic_energy([1.0, 0.0, 0.0], FLAT, UNIT) == pytest.approx(1.0, abs=1e-9)
    assert magnetic_energy([3.0, 4.0, 0.0], FLAT, UNIT) == pytest.approx(25.0, abs=1e-9)


@pytest.mark.parametrize("lam,t", [(1.0, 1.0), (0.3, 2.0), (-0.5, 0.4)])
def test_energy_conformal_closed_form(lam, t):
    # B^i g_ij B^j sqrt(det g) = e^{-2 lam t} e^{-3 lam t}
    eps = magnetic_energy([1.0, 0.0, 0.0], ConformalLyapunov(lam), UNIT, t)
    assert eps == pytest.approx(np.exp(-5 * lam * t), abs=1e-6)


def test_energy_on_sphere_by_separable_integral():
    # integrand r^2 * r^3 sin^2(chi) sin(theta) for B = e_chi
    eps = magnetic_energy([1.0, 0.0, 0.0], RoundSphere(1.0), QuadratureSpec(
        (0.5, 0.5, 0.0), (1.0, 1.0, 1.0), (40, 40, 1)))
    chi = 0.5 * (1.0 - 0.5) - 0.25 * (np.sin(2.0) - np.sin(1.0))
    th = np.cos(0.5) - np.cos(1.0)
    assert eps == pytest.approx(chi * th, rel=1e-3)


def test_magnetic_energy_rejects_non_finite_field():
    with pytest.raises(InvalidInput):
        magnetic_energy(lambda x: np.full(x.shape, np.nan), FLAT, UNIT)


@pytest.mark.parametrize("v,b", [
    (planar_shear(2.0), np.array([1.0, 1.0, 0.0]) / np.sqrt(2)),
    (LinearGradient(np.diag([1.0, -1.0, 0.0])), np.array([1.0, 0.0, 0.0])),
    (LinearGradient(np.diag([0.5, 0.5, -1.0])), np.array([0.0, 0.0, 1.0])),
])
def test_flat_incompressible_rate_oracle(v, b):
    closed = energy_rate(v, b, FLAT, CENTRED)
    numeric = energy_rate_numeric(scenario(velocity=v, field=b))
    assert closed == pytest.approx(numeric, rel=2e-3)


def test_compressible_flat_rate_differs_from_numeric():
    # v = x: d(B.B)/dt = 2 B.B exactly, while the eq27 bracket gives -theta/6 B.B = 0.5 B.B
    v = LinearGradient(np.eye(3))
    b = np.array([1.0, 0.0, 0.0])
    assert energy_rate_numeric(scenario(velocity=v, field=b)) == pytest.approx(2.0, rel=1e-6)
    assert energy_rate(v, b, FLAT, CENTRED) == pytest.approx(0.5, rel=1e-12)


def test_sphere_variants_report_opposite_signs():
    sphere = RoundSphere(1.0)
    b = [1.0, 0.0, 0.0]
    eps = magnetic_energy(b, sphere, SPHERE_REGION)
    r27 = energy_rate(ZERO, b, sphere, SPHERE_REGION, variant="eq27")
    r29 = energy_rate(ZERO, b, sphere, SPHERE_REGION, variant="eq29chain")
    assert r29 == pytest.approx(4.0 * eps, rel=1e-6)
    assert r27 == pytest.approx(-8.0 * eps, rel=1e-6)
    assert r27 / r29 == pytest.approx(-2.0, abs=1e-3)
    assert variants_diverge(r27, r29, eps)


def test_sphere_numeric_rate_under_ricci_flow():
    # g = c(t) g0 with c' = -4: eps scales as c^(5/2), so d eps/dt = -10 eps at c = 1
    sphere = RoundSphere(1.0)
    region = QuadratureSpec((0.5, 0.5, 0.0), (1.0, 1.0, 1.0), (3, 3, 2))
    sc = scenario(metric=sphere, velocity=ZERO, field=[1.0, 0.0, 0.0], region=region, evolve_metric=True)
    eps = magnetic_energy([1.0, 0.0, 0.0], sphere, region)
    rate = energy_rate_numeric(sc, h=1e-3)
    c = 1 - 4e-3
    assert rate == pytest.approx(-10.0 * c ** 1.5 * eps, rel=1e-4)
    with pytest.raises(InvalidInput):
        energy_rate_numeric(sc, t=0.0)


def test_eq29_requires_einstein():
    bumpy = DiagonalCustom(lambda x: 1 + 0.3 * np.sin(x[..., 1]), lambda x: np.ones(x.shape[:-1]),
                           lambda x: np.ones(x.shape[:-1]))
    with pytest.raises(NotEinstein):
        energy_rate(ZERO, [1, 0, 0], bumpy, QuadratureSpec.cube(0.2, 0.8, 2), variant="eq29chain")
    with pytest.raises(InvalidInput):
        energy_rate(ZERO, [1, 0, 0], FLAT, UNIT, variant="eq28")


@pytest.mark.parametrize("omega,theta,lam", [(0.0, 0.0, 2.0), (4.0, 0.0, 0.0), (1.0, -3.0, 0.5),
                                             (-2.0, 1.5, -1.0)])
def test_marginal_scenarios(omega, theta, lam):
    sig = marginal_shear(omega, theta, lam)
    np.testing.assert_allclose(eq29_integrand(sig, omega, theta, lam, np.eye(3)), 0.0, atol=1e-15)
    d = FlowDecomposition.from_parts(sig, theta)
    b = [0.3, 0.4, 1.2]
    eps = magnetic_energy(b, FLAT, UNIT)
    rate = energy_rate(d, b, FLAT, UNIT, variant="eq29chain", einstein_constant=lam,
                       vorticity_scalar=omega)
    assert abs(rate) < 1e-9 * eps
    s = float(np.asarray(b) @ sig @ np.asarray(b)) / float(np.dot(b, b))
    assert classify(s, omega, theta, lam).classification == MARGINAL
    assert classify(s + 1e-3, omega, theta, lam).classification == FAST
    assert classify(s - 1e-3, omega, theta, lam).classification == DECAYING


def test_classify_examples():
    v = classify(0.0, 0.0, 0.0, 1.0)
    assert v.classification == FAST and v.margin == 1.0
    assert classify(-2.0, 0.0, 0.0, 0.0).classification == DECAYING
    assert classify(1e-10, 0, 0, 0).classification == MARGINAL
    assert v.as_dict()["verdict"] == "Fast"
    with pytest.raises(InvalidInput):
        classify(0, 0, 0, 0, tol=0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10),
       st.floats(1e-3, 1.0))
def test_classification_monotone_in_sigma(sigma, omega, theta, lam, bump):
    order = {DECAYING: 0, MARGINAL: 1, FAST: 2}
    lo = classify(sigma, omega, theta, lam).classification
    hi = classify(sigma + bump, omega, theta, lam).classification
    assert order[hi] >= order[lo]
    assert dynamo_margin(sigma + bump, omega, theta, lam) > dynamo_margin(sigma, omega, theta, lam)


def test_energy_report_dict():
    rep = EnergyReport(1.0, 2.0, -1.0, None, UNIT, 2.0, True, {"x": True})
    d = rep.as_dict()
    assert d["variant_divergence"] and d["quadrature"]["counts"] == [4, 4, 4]
    assert not variants_diverge(1.0, None, 1.0)
