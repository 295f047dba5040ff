import numpy as np
import pytest
from scipy.linalg import expm

from ricci_dynamo.errors import InconsistentFrame, InvalidInput
from ricci_dynamo.geometry import EuclideanFlat, RoundSphere
from ricci_dynamo.induction import (
    MagneticMode,
    MagneticState,
    evolve_B,
    fast_dynamo_operator,
    fit_growth_rate,
    induction_rhs,
    magnetic_mode,
    mode_growth_rate,
)
from ricci_dynamo.kinematics import (
    LinearGradient,
    RigidRotation,
    covariant_gradient,
    decompose,
    frame_vorticity,
    planar_shear,
)

FLAT = EuclideanFlat()
P = np.array([0.2, -0.1, 0.3])
A = np.array([[0.3, 1.0, -0.2], [0.0, -0.5, 0.4], [0.6, 0.1, 0.2]])


def test_rhs_small_cases():
    np.testing.assert_allclose(induction_rhs([1, 0, 0], LinearGradient(np.eye(3)), FLAT, "matched", P),
                               [1.0, 0.0, 0.0])
    np.testing.assert_allclose(
        induction_rhs([1, 0, 0], LinearGradient(2 * np.eye(3)), FLAT, np.zeros((3, 3)), P), [2.0, 0.0, 0.0])


def test_matched_frame_evolves_with_symmetric_part():
    # flat, matched frame: dB/dt = sym(A) B, solved exactly by the matrix exponential
    tr = evolve_B([0.3, -0.4, 1.0], LinearGradient(A), FLAT, "matched", (0.0, 0.5), 1e-3, p=P)
    exact = expm(0.5 * 0.5 * (A + A.T)) @ np.array([0.3, -0.4, 1.0])
    np.testing.assert_allclose(tr.B[-1], exact, rtol=1e-10)


def test_lab_frame_evolves_with_full_gradient():
    tr = evolve_B([0.3, -0.4, 1.0], LinearGradient(A), FLAT, np.zeros((3, 3)), (0.0, 0.5), 1e-3, p=P)
    np.testing.assert_allclose(tr.B[-1], expm(0.5 * A) @ np.array([0.3, -0.4, 1.0]), rtol=1e-10)


def test_full_and_rigid_forms_agree_when_matched():
    rng = np.random.default_rng(5)
    sphere = RoundSphere(1.0)
    for _ in range(100):
        v = LinearGradient(rng.uniform(-2, 2, (3, 3)))
        p = np.array([rng.uniform(0.3, 2.8), rng.uniform(0.3, 2.8), rng.uniform(0, 6)])
        b = rng.uniform(-1, 1, 3)
        np.testing.assert_allclose(induction_rhs(b, v, sphere, "matched", p, form="full"),
                                   induction_rhs(b, v, sphere, "matched", p, form="rigid"), atol=1e-10)


def test_rigid_form_rejects_mismatched_frame():
    v = RigidRotation([0.0, 0.0, 1.0])
    d = decompose(covariant_gradient(v, FLAT, P))
    induction_rhs([1, 0, 0], v, FLAT, frame_vorticity(d), P, form="rigid")
    with pytest.raises(InconsistentFrame):
        induction_rhs([1, 0, 0], v, FLAT, np.zeros((3, 3)), P, form="rigid")
    with pytest.raises(InvalidInput):
        induction_rhs([1, 0, 0], v, FLAT, "matched", P, form="weak")
    with pytest.raises(InvalidInput):
        induction_rhs([1, 0, 0], v, FLAT, np.eye(3), P)


def test_vectorised_rhs_matches_loop():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1, 1, (7, 3))
    bs = rng.uniform(-1, 1, (7, 3))
    v = LinearGradient(A)
    batch = induction_rhs(bs, v, FLAT, "matched", pts)
    for b, p, row in zip(bs, pts, batch):
        np.testing.assert_allclose(induction_rhs(b, v, FLAT, "matched", p), row, atol=1e-14)


def test_uniform_expansion_growth():
    tr = evolve_B([1.0, 0.0, 0.0], LinearGradient(np.eye(3)), FLAT, "matched", (0, 1), 1e-3, p=P)
    assert tr.growth_rate == pytest.approx(1.0, abs=1e-6)
    assert tr.predicted == {"with_vorticity": pytest.approx(1.0), "without_vorticity": pytest.approx(1.0)}
    np.testing.assert_allclose(tr.running_rate()[1:-1], 1.0, atol=1e-6)


def test_planar_shear_eigendirection_growth():
    b = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    tr = evolve_B(b, planar_shear(2.0), FLAT, "matched", (0, 1), 1e-3, p=P)
    assert tr.growth_rate == pytest.approx(1.0, abs=1e-5)
    assert tr.predicted["without_vorticity"] == pytest.approx(1.0)


def test_rigid_rotation_does_not_grow():
    tr = evolve_B([0.3, -0.5, 0.8], RigidRotation([0, 0, 1]), FLAT, "matched", (0, 1), 1e-3, p=P)
    assert abs(tr.growth_rate) < 1e-8


def test_mode_growth_rate_variants():
    d = decompose(covariant_gradient(planar_shear(2.0), FLAT, P))
    b = [1.0, 1.0, 0.0]
    assert mode_growth_rate(d, b) == pytest.approx(1.0)
    assert mode_growth_rate(d, b, include_vorticity=True) == pytest.approx(1.0)
    d = decompose(covariant_gradient(LinearGradient(-np.eye(3)), FLAT, P))
    assert mode_growth_rate(d, [0, 0, 1]) == pytest.approx(-1.0)


def test_magnetic_mode():
    d = decompose(covariant_gradient(LinearGradient(np.eye(3)), FLAT, P))
    mode = magnetic_mode(d, [2.0, 0.0, 0.0], wavevector=[0.0, 0.0, np.pi])
    np.testing.assert_allclose(mode.amplitude_at(1.0), [2 * np.e, 0, 0])
    np.testing.assert_allclose(mode.at([0, 0, 1.0], 0.0), [-2.0, 0, 0], atol=1e-15)
    with pytest.raises(InvalidInput):
        MagneticMode(np.zeros(3), 1.0, np.zeros(3))
    with pytest.raises(InvalidInput):
        MagneticState([1.0, np.nan, 0.0])


def test_fast_dynamo_operator():
    t = np.linspace(0, 1, 1001)
    d = decompose(np.eye(3))
    exact = np.exp(t)[:, None] * np.array([1.0, 0.0, 0.0])
    res = fast_dynamo_operator(t, exact, d)
    assert res.max_relative < 1e-6
    assert res.bracket == pytest.approx(1.0)
    wrong = np.exp(2 * t)[:, None] * np.array([1.0, 0.0, 0.0])
    assert np.median(fast_dynamo_operator(t, wrong, d).relative) == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(InvalidInput):
        fast_dynamo_operator(t[:2], exact[:2], d)


def test_fit_growth_rate_uses_second_half():
    t = np.linspace(0, 2, 201)
    norms = np.where(t < 1, np.exp(5 * t), np.exp(5.0) * np.exp(0.5 * (t - 1)))
    assert fit_growth_rate(t, norms) == pytest.approx(0.5, rel=1e-9)


def test_multiple_points_at_once():
    pts = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]])
    tr = evolve_B(np.array([[1.0, 0, 0], [0, 1.0, 0]]), LinearGradient(np.eye(3)), FLAT, "matched",
                  (0, 0.5), 1e-2, p=pts)
    assert tr.B.shape == (51, 2, 3)
    np.testing.assert_allclose(tr.growth_rate, [1.0, 1.0], rtol=1e-8)
