import math

import numpy as np
import pytest

from raidnav.errors import NoKeyframes
from raidnav.geometry import Transform3D
from raidnav.odometry.features import FeatureSet
from raidnav.odometry.voxel_map import (Keyframe, VoxelFeatureMap, build_voxel_map,
                                        is_new_keyframe, voxel_dedup)


def kf(edges, planars, pose=None, index=0):
    return Keyframe(FeatureSet.from_arrays(edges, planars, index), pose or Transform3D.identity(), index)


def test_single_identity_keyframe():
    e = np.array([[0.01, 0.01, 0.01], [0.02, 0.02, 0.02], [1.0, 1.0, 1.0]])
    p = np.array([[2.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    m = build_voxel_map([kf(e, p)], 1, 0.1)
    np.testing.assert_array_equal(m.edge_points, [[0.01, 0.01, 0.01], [1.0, 1.0, 1.0]])
    np.testing.assert_array_equal(m.planar_points, p)
    assert m.keyframe_window == 1


def test_shared_voxel_keeps_first_inserted():
    a = kf([[0.51, 0.5, 0.5]], np.zeros((0, 3)), index=0)
    b = kf([[0.55, 0.5, 0.5]], np.zeros((0, 3)), index=1)
    m = build_voxel_map([b, a], 2, 0.1)
    np.testing.assert_array_equal(m.edge_points, [[0.51, 0.5, 0.5]])


def test_offset_keyframes_land_in_world_coordinates():
    cluster = np.array([[0.0, 0.0, 0.0], [0.0, 0.5, 0.0]])
    a = kf(cluster, cluster, Transform3D.identity(), 0)
    b = kf(cluster, cluster, Transform3D.translate(10.0, 0.0, 0.0), 1)
    m = build_voxel_map([a, b], 2, 0.05)
    expected = np.vstack([cluster, cluster + [10.0, 0.0, 0.0]])
    np.testing.assert_allclose(m.edge_points, expected)
    np.testing.assert_allclose(m.planar_points, expected)


def test_window_uses_most_recent():
    frames = [kf([[float(i), 0, 0]], [[float(i), 1, 0]], index=i) for i in range(5)]
    m = build_voxel_map(frames, 2, 0.1)
    np.testing.assert_array_equal(m.edge_points, [[3.0, 0, 0], [4.0, 0, 0]])


def test_errors():
    with pytest.raises(NoKeyframes):
        build_voxel_map([], 1, 0.1)
    with pytest.raises(ValueError):
        build_voxel_map([kf([[0, 0, 0]], [[1, 0, 0]])], 2, 0.1)
    with pytest.raises(ValueError):
        VoxelFeatureMap(0.0, np.zeros((1, 3)), np.zeros((1, 3)))


def test_dedup_bound(rng):
    pts = rng.uniform(0, 1, (2000, 3))
    out = voxel_dedup(pts, 0.25)
    keys = np.floor(out / 0.25)
    assert len(np.unique(keys, axis=0)) == len(out) <= 64


def test_keyframe_admission():
    eye = Transform3D.identity()
    assert not is_new_keyframe(eye, Transform3D.translate(0.5, 0, 0))
    assert is_new_keyframe(eye, Transform3D.translate(1.0, 0, 0))
    assert is_new_keyframe(eye, Transform3D.rot_z(math.radians(11)))
    assert not is_new_keyframe(eye, Transform3D.rot_z(math.radians(5)))
