import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation

from gnc_robust import DegenerateConfiguration, RigidPose, registration_residuals, weighted_horn
from gnc_robust.registration import weighted_objective
from gnc_robust.synthetic import random_rotation

from oracles import refine_registration


@pytest.fixture
def cloud():
    rng = np.random.default_rng(0)
    src = rng.uniform(-1, 1, (100, 3))
    R = random_rotation(rng)
    t = rng.uniform(-1, 1, 3)
    return src, R, t, rng


def test_identity():
    a = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
    pose = weighted_horn(a, a)
    np.testing.assert_array_almost_equal(pose.R, np.eye(3), decimal=15)
    np.testing.assert_array_almost_equal(pose.t, np.zeros(3), decimal=15)


def test_recovers_noiseless_transform(cloud):
    src, R, t, _ = cloud
    pose = weighted_horn(src, src @ R.T + t)
    # arccos loses precision near zero; use the rotation-vector angle
    assert Rotation.from_matrix(R.T @ pose.R).magnitude() < 1e-9
    assert np.linalg.norm(pose.t - t) < 1e-9


def test_weight_scale_invariance(cloud):
    src, R, t, rng = cloud
    dst = src @ R.T + t + 0.05 * rng.standard_normal(src.shape)
    w = rng.uniform(0, 1, len(src))
    p1 = weighted_horn(src, dst, w)
    p2 = weighted_horn(src, dst, 0.37 * w)
    np.testing.assert_allclose(p1.R, p2.R, atol=1e-12)
    np.testing.assert_allclose(p1.t, p2.t, atol=1e-12)


def test_zero_weight_equals_deletion(cloud):
    src, R, t, rng = cloud
    dst = src @ R.T + t + 0.05 * rng.standard_normal(src.shape)
    dst[:10] = rng.uniform(-3, 3, (10, 3))
    w = rng.uniform(0.1, 1, len(src))
    w0 = w.copy()
    w0[:10] = 0
    p1 = weighted_horn(src, dst, w0)
    p2 = weighted_horn(src[10:], dst[10:], w[10:])
    np.testing.assert_allclose(p1.R, p2.R, atol=1e-12)
    np.testing.assert_allclose(p1.t, p2.t, atol=1e-12)


def test_equivariance(cloud):
    src, R, t, rng = cloud
    dst = src @ R.T + t + 0.05 * rng.standard_normal(src.shape)
    w = rng.uniform(0, 1, len(src))
    S = random_rotation(rng)
    p = weighted_horn(src, dst, w)
    q = weighted_horn(src, dst @ S.T, w)
    np.testing.assert_allclose(q.R, S @ p.R, atol=1e-9)
    np.testing.assert_allclose(q.t, S @ p.t, atol=1e-9)


def test_local_optimality_against_refinement():
    rng = np.random.default_rng(42)
    src = rng.uniform(0, 1, (100, 3))
    R = random_rotation(rng)
    dst = src @ R.T + rng.uniform(-1, 1, 3) + 0.1 * rng.standard_normal((100, 3))
    w = rng.uniform(0, 1, 100)
    pose = weighted_horn(src, dst, w)
    refined, start = refine_registration(src, dst, w, pose.R, pose.t)
    assert start == pytest.approx(weighted_objective(src, dst, w, pose), rel=1e-12)
    assert start - refined <= 1e-8 * start


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, (12, 3), elements=st.floats(-10, 10)),
    arrays(np.float64, (12, 3), elements=st.floats(-10, 10)),
    arrays(np.float64, 12, elements=st.floats(0, 1)),
)
def test_output_is_rotation_under_adversarial_weights(a, b, w):
    try:
        pose = weighted_horn(a, b, w)
    except DegenerateConfiguration:
        return
    np.testing.assert_allclose(pose.R.T @ pose.R, np.eye(3), atol=1e-9)
    assert np.linalg.det(pose.R) == pytest.approx(1.0, abs=1e-9)


def test_reflection_is_corrected():
    # a mirrored cloud has its best orthogonal fit with det -1
    rng = np.random.default_rng(9)
    a = rng.standard_normal((20, 3))
    b = a * np.array([1, 1, -1])
    pose = weighted_horn(a, b)
    assert np.linalg.det(pose.R) == pytest.approx(1.0)


@pytest.mark.parametrize("case", ["zero_weight", "collinear", "coincident"])
def test_degenerate(case):
    a = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0.0]])
    w = np.ones(4)
    if case == "zero_weight":
        a = np.eye(4, 3)
        w = np.zeros(4)
    elif case == "coincident":
        a = np.ones((4, 3))
    with pytest.raises(DegenerateConfiguration):
        weighted_horn(a, a + 1.0, w)


def test_three_points_suffice():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 3))
    R = random_rotation(rng)
    pose = weighted_horn(a, a @ R.T)
    np.testing.assert_allclose(pose.R, R, atol=1e-10)


class TestResiduals:
    def test_zero_at_truth(self, cloud):
        src, R, t, _ = cloud
        np.testing.assert_allclose(registration_residuals(src, src @ R.T + t, RigidPose(R, t)), 0, atol=1e-14)

    def test_unit(self):
        r = registration_residuals([[0, 0, 0]], [[1, 0, 0]], RigidPose.identity())
        assert r.tolist() == [1.0]

    def test_double_evaluation(self, cloud):
        src, R, t, rng = cloud
        dst = rng.standard_normal(src.shape)
        r = registration_residuals(src, dst, RigidPose(R, t))
        loop = [np.sqrt(sum((dst[i, k] - sum(R[k, j] * src[i, j] for j in range(3)) - t[k]) ** 2
                            for k in range(3))) for i in range(len(src))]
        np.testing.assert_allclose(r, loop, rtol=0, atol=1e-12)
