import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import X, lambdify_at, symbolic_christoffel_ricci
from ricci_dynamo.errors import InvalidInput, SingularMetric
from ricci_dynamo.geometry import (
    ConformalLyapunov,
    DiagonalCustom,
    EinsteinScaled,
    EuclideanFlat,
    HyperbolicSpace,
    RoundSphere,
    christoffel,
    connection,
    einstein_check,
    einstein_fit,
    paper_symmetry_check,
    ricci,
    ricci_tensor,
    volume_element,
)
from ricci_dynamo.kinematics import PaperSteady, Uniform
from ricci_dynamo.numerics import QuadratureSpec

SPHERE_REGION = QuadratureSpec((0.5, 0.5, 0.0), (1.0, 1.0, 1.0), (3, 3, 2))


@pytest.fixture(scope="module")
def custom_oracle():
    exprs = (1 + sp.Rational(3, 10) * sp.sin(X[1]), sp.exp(X[0] / 5), 1 + X[0] ** 2 * X[2] ** 2 / 4)
    gam, ric = symbolic_christoffel_ricci(sp.diag(*exprs))
    fns = [sp.lambdify(X, e, "numpy") for e in exprs]
    metric = DiagonalCustom(*(lambda x, f=f: f(x[..., 0], x[..., 1], x[..., 2]) * np.ones(x.shape[:-1])
                              for f in fns))
    return metric, gam, ric


def test_custom_metric_against_symbolic_ricci(custom_oracle):
    m, gam, ric = custom_oracle
    for p in ([0.4, 0.7, 0.9], [-0.3, 1.2, 0.5]):
        p = np.array(p)
        np.testing.assert_allclose(christoffel(m, p), lambdify_at(gam, p), atol=1e-8)
        np.testing.assert_allclose(ricci_tensor(m, p), lambdify_at(ric.tolist(), p), atol=2e-6)


def test_sphere_chart_against_symbolic_ricci():
    r = 1.7
    g = sp.diag(r ** 2, r ** 2 * sp.sin(X[0]) ** 2, r ** 2 * sp.sin(X[0]) ** 2 * sp.sin(X[1]) ** 2)
    gam, ric = symbolic_christoffel_ricci(g)
    p = np.array([0.8, 1.1, 0.3])
    m = RoundSphere(r)
    np.testing.assert_allclose(christoffel(m, p), lambdify_at(gam, p), atol=1e-12)
    np.testing.assert_allclose(ricci_tensor(m, p), lambdify_at(ric.tolist(), p), atol=1e-7)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("family,sign", [(RoundSphere, 1.0), (HyperbolicSpace, -1.0)])
def test_constant_curvature_families(family, sign, r):
    m = family(r)
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(0.3, 2.8, 20), rng.uniform(0.3, 2.8, 20), rng.uniform(0, 6, 20)])
    target = sign * 2.0 / r ** 2 * m.g(pts)
    rel = np.linalg.norm(ricci_tensor(m, pts) - target, axis=(1, 2)) / np.linalg.norm(target, axis=(1, 2))
    assert rel.max() < 1e-5
    assert m.einstein_constant == pytest.approx(sign * 2 / r ** 2)


def test_christoffel_value_on_sphere():
    conn = connection(RoundSphere(1.0), [np.pi / 4, 1.0, 0.2])
    assert conn.gamma[0, 1, 1] == pytest.approx(-0.5, abs=1e-12)
    assert conn.rotation_coefficient(1, 1, 0) == pytest.approx(-0.5, abs=1e-12)


def test_flat_and_conformal():
    p = np.array([0.1, -0.4, 2.0])
    assert np.all(christoffel(EuclideanFlat(), p) == 0)
    assert np.all(ricci_tensor(EuclideanFlat(), p) == 0)
    m = ConformalLyapunov(0.5)
    np.testing.assert_allclose(m.g(p, 2.0), np.exp(-2.0) * np.eye(3))
    assert np.abs(ricci_tensor(m, p, 1.0)).max() < 1e-9


def test_einstein_scaled_is_exact_flow():
    base = RoundSphere(1.0)
    m = EinsteinScaled(base, scale=3.0)
    p = np.array([1.0, 1.2, 0.5])
    t, h = 0.3, 1e-4
    dgdt = (m.g(p, t + h) - m.g(p, t - h)) / (2 * h)
    np.testing.assert_allclose(dgdt, -2.0 * ricci_tensor(m, p, t), atol=1e-7)
    with pytest.raises(InvalidInput):
        EinsteinScaled(DiagonalCustom(np.cos, np.cos, np.cos))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 2.8), st.floats(0.3, 2.8), st.floats(0, 6), st.floats(0.2, 5.0))
def test_ricci_scale_invariance_property(a, b, c, scale):
    p = np.array([a, b, c])
    base = HyperbolicSpace(1.0)
    np.testing.assert_allclose(ricci_tensor(EinsteinScaled(base, scale=scale), p),
                               ricci_tensor(base, p), atol=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 2.8), st.floats(0.3, 2.8), st.floats(0, 6))
def test_metric_compatibility_property(a, b, c):
    p = np.array([a, b, c])
    m = RoundSphere(1.3)
    gam = christoffel(m, p)
    g = m.g(p)
    cov = m.dg(p) - np.einsum("mki,mj->kij", gam, g) - np.einsum("mkj,im->kij", gam, g)
    assert np.abs(cov).max() < 1e-10
    assert np.abs(ricci_tensor(m, p) - ricci_tensor(m, p).T).max() < 1e-9


def test_einstein_fit_and_check():
    fit = einstein_fit(RoundSphere(1.0), SPHERE_REGION)
    assert fit.lambda_hat == pytest.approx(2.0, rel=1e-8)
    assert fit.residual < 1e-6
    assert einstein_check(HyperbolicSpace(2.0), SPHERE_REGION) == pytest.approx(-0.5, rel=1e-8)
    bumpy = DiagonalCustom(lambda x: 1 + 0.3 * np.sin(x[..., 1]), lambda x: np.ones(x.shape[:-1]),
                           lambda x: np.ones(x.shape[:-1]))
    assert einstein_check(bumpy, QuadratureSpec.cube(0.2, 0.8, 3)) is None


def test_pointwise_report():
    rep = ricci(RoundSphere(1.0), [1.0, 1.0, 0.0])
    assert rep.scalar == pytest.approx(6.0, rel=1e-8)
    assert rep.residual < 1e-8


def test_singular_metric_raises_with_point():
    m = DiagonalCustom(lambda x: x[..., 0], lambda x: np.ones(x.shape[:-1]), lambda x: np.ones(x.shape[:-1]))
    with pytest.raises(SingularMetric) as err:
        m.checked_g(np.array([[1.0, 0, 0], [-1.0, 0.5, 0.0]]))
    assert err.value.point == (-1.0, 0.5, 0.0)
    with pytest.raises(SingularMetric):
        EinsteinScaled(RoundSphere(1.0)).checked_g([1.0, 1.0, 0.0], 0.5)


def test_volume_element():
    assert volume_element(RoundSphere(2.0), [np.pi / 2, np.pi / 2, 0.0]) == pytest.approx(8.0)
    assert volume_element(ConformalLyapunov(1.0), [0, 0, 0], 1.0) == pytest.approx(np.exp(-3.0))


def test_paper_symmetry_check():
    ok = paper_symmetry_check(EuclideanFlat(), PaperSteady(), QuadratureSpec.cube(0, 1, 2))
    assert ok.passed
    sph = paper_symmetry_check(RoundSphere(1.0), PaperSteady(), SPHERE_REGION)
    assert sph.killing_ok and sph.flow_ok
    bad = paper_symmetry_check(EuclideanFlat(), Uniform([1.0, 0.0, 0.0]), QuadratureSpec.cube(0, 1, 2))
    assert not bad.flow_ok and bad.flow_residual == pytest.approx(np.sqrt(2.0))
    custom = DiagonalCustom(lambda x: np.ones(x.shape[:-1]), lambda x: np.ones(x.shape[:-1]),
                            lambda x: 1 + x[..., 2] ** 2)
    rep = paper_symmetry_check(custom, PaperSteady(), QuadratureSpec.cube(0.5, 1.0, 2))
    assert not rep.killing_ok and rep.as_dict()["killing_residual"] > 0.1


def test_snapshot_ignores_time():
    snap = ConformalLyapunov(1.0).snapshot(0.5)
    np.testing.assert_allclose(snap.g([0, 0, 0], 10.0), np.exp(-1.0) * np.eye(3))
