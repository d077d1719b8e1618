import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from raidnav.geometry import (PointCloud, Pose2D, Transform3D, compose, matrix_to_rpy,
                              relative_transform, rpy_to_matrix, transform_cloud, wrap_angle)

angles = st.floats(-1e4, 1e4, allow_nan=False)


def random_tf(rng):
    return Transform3D.from_xyz_rpy(*rng.uniform(-5, 5, 3), *rng.uniform(-math.pi, math.pi, 3))


@given(angles)
def test_wrap_range_and_idempotent(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert wrap_angle(w) == w


def test_wrap_boundaries():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)


@given(angles, angles)
def test_pose_theta_wrapped_after_compose(a, b):
    p = Pose2D(1.0, 2.0, a).compose(Pose2D(0.5, -0.3, b))
    assert -math.pi < p.theta <= math.pi


def test_compose_identity_and_inverse(rng):
    eye = Transform3D.identity()
    assert compose(eye, eye).allclose(eye)
    for _ in range(50):
        t = random_tf(rng)
        assert compose(t, t.inverse()).allclose(eye, 1e-9)


def test_compose_translations_commute():
    out = compose(Transform3D.translate(1, 0, 0), Transform3D.translate(0, 2, 0))
    assert out.allclose(Transform3D.translate(1, 2, 0))


def test_compose_is_b_then_a():
    a, b = Transform3D.rot_z(math.pi / 2), Transform3D.translate(1, 0, 0)
    p = np.array([[0.0, 0.0, 0.0]])
    np.testing.assert_allclose(compose(a, b).apply(p), a.apply(b.apply(p)), atol=1e-12)


def test_compose_associative(rng):
    for _ in range(200):
        a, b, c = random_tf(rng), random_tf(rng), random_tf(rng)
        assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)), 1e-9)


def test_relative_transform_examples(rng):
    t = random_tf(rng)
    assert relative_transform(t, t).allclose(Transform3D.identity(), 1e-9)
    assert relative_transform(Transform3D.identity(), Transform3D.translate(1, 0, 0)).allclose(
        Transform3D.translate(1, 0, 0))
    rz = Transform3D.rot_z(math.pi / 2)
    out = relative_transform(rz, compose(rz, Transform3D.translate(1, 0, 0)))
    assert out.allclose(Transform3D.translate(1, 0, 0), 1e-12)


def test_transform_cloud_examples():
    c = PointCloud(np.array([[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]]))
    np.testing.assert_array_equal(transform_cloud(Transform3D.identity(), c).points, c.points)
    out = transform_cloud(Transform3D.translate(0, 0, 1), PointCloud(np.zeros((1, 3))))
    np.testing.assert_array_equal(out.points, [[0.0, 0.0, 1.0]])
    out = transform_cloud(Transform3D.rot_z(math.pi / 2), PointCloud(np.array([[1.0, 0, 0]])))
    np.testing.assert_allclose(out.points, [[0.0, 1.0, 0.0]], atol=1e-12)
    assert len(out) == 1


def test_transform_cloud_composes(rng):
    pts = PointCloud(rng.normal(size=(20, 3)))
    for _ in range(100):
        a, b = random_tf(rng), random_tf(rng)
        np.testing.assert_allclose(transform_cloud(compose(a, b), pts).points,
                                   transform_cloud(a, transform_cloud(b, pts)).points, atol=1e-9)


def test_transform_invariants(rng):
    for _ in range(100):
        t = random_tf(rng)
        r = t.rotation
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-9)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-9)
        assert t.is_valid()


def test_invalid_rotation_rejected():
    with pytest.raises(ValueError):
        Transform3D(np.diag([1.0, 1.0, -1.0]), np.zeros(3))


def test_rpy_roundtrip(rng):
    for _ in range(100):
        rpy = (rng.uniform(-3, 3), rng.uniform(-1.5, 1.5), rng.uniform(-3, 3))
        np.testing.assert_allclose(matrix_to_rpy(rpy_to_matrix(*rpy)), rpy, atol=1e-9)


def test_transform_is_immutable():
    t = Transform3D.translate(1, 2, 3)
    with pytest.raises(ValueError):
        t.translation[0] = 5.0


def test_point_cloud_rejects_non_finite():
    with pytest.raises(ValueError):
        PointCloud(np.array([[0.0, np.nan, 1.0]]))
    with pytest.raises(ValueError):
        PointCloud(np.array([[np.inf, 0.0, 1.0]]))


def test_point_cloud_csv_roundtrip(tmp_path, rng):
    c = PointCloud(rng.normal(size=(30, 3)))
    p = tmp_path / "c.csv"
    c.to_csv(p)
    assert p.read_text().splitlines()[0] == "x,y,z"
    np.testing.assert_array_equal(PointCloud.from_csv(p).points, c.points)


def test_point_cloud_csv_errors_name_the_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y,z\n1,2,3\n1,oops,3\n")
    with pytest.raises(ValueError, match=":3:"):
        PointCloud.from_csv(p)
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="header"):
        PointCloud.from_csv(p)
