"""Keyframes and the voxel-deduplicated local feature map."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..errors import NoKeyframes
from ..geometry import Transform3D
from .features import FeatureSet


@dataclass(frozen=True)
class Keyframe:
    features: FeatureSet
    pose: Transform3D
    index: int

    def __post_init__(self):
        if not self.pose.is_valid():
            raise ValueError(f"keyframe {self.index} has an invalid pose")


def is_new_keyframe(last: Transform3D, pose: Transform3D,
                    translation_threshold: float = 1.0,
                    yaw_threshold: float = math.radians(10.0)) -> bool:
    """Admit a frame once the robot moved far enough from the last keyframe."""
    delta = last.inverse() @ pose
    if np.linalg.norm(delta.translation) >= translation_threshold:
        return True
    return abs(delta.to_xyz_rpy()[5]) >= yaw_threshold


def voxel_dedup(points: np.ndarray, voxel_size: float) -> np.ndarray:
    """Keep the first point falling in each voxel cell, preserving order."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return pts
    keys = np.floor(pts / voxel_size).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(first)]


@dataclass(frozen=True, eq=False)
class VoxelFeatureMap:
    """World-frame edge and planar stores with one point per voxel."""

    voxel_size: float
    edge_points: np.ndarray
    planar_points: np.ndarray
    keyframe_window: int = 1
    edge_tree: cKDTree | None = field(init=False, repr=False, default=None)
    planar_tree: cKDTree | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be positive")
        for name in ("edge_points", "planar_points"):
            pts = voxel_dedup(getattr(self, name), self.voxel_size)
            pts.setflags(write=False)
            object.__setattr__(self, name, pts)
        object.__setattr__(self, "edge_tree", cKDTree(self.edge_points) if len(self.edge_points) else None)
        object.__setattr__(self, "planar_tree", cKDTree(self.planar_points) if len(self.planar_points) else None)

    @classmethod
    def from_features(cls, features: FeatureSet, voxel_size: float = 0.01) -> "VoxelFeatureMap":
        return cls(voxel_size, features.edge_points.points, features.planar_points.points)

    def __len__(self):
        return len(self.edge_points) + len(self.planar_points)


def build_voxel_map(keyframes: Sequence[Keyframe], n: int, voxel_size: float) -> VoxelFeatureMap:
    """Merge the ``n`` most recent keyframes into a world-frame voxel map.

    Keyframes are taken in index order and inserted oldest first, so the
    earliest observation of a voxel is the one retained.
    """
    if not keyframes:
        raise NoKeyframes("cannot build a map without keyframes")
    if not 1 <= n <= len(keyframes):
        raise ValueError(f"n={n} must lie in [1, {len(keyframes)}]")
    window = sorted(keyframes, key=lambda k: k.index)[-n:]
    edges = [kf.pose.apply(kf.features.edge_points.points) for kf in window]
    planars = [kf.pose.apply(kf.features.planar_points.points) for kf in window]
    return VoxelFeatureMap(voxel_size, np.concatenate(edges), np.concatenate(planars), n)
