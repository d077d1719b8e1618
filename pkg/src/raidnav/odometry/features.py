"""Scan smoothness and edge/planar feature classification."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegeneratePoint, EmptyScan, IndexOutOfNeighborhood
from ..geometry import PointCloud


@dataclass(frozen=True)
class SmoothnessParams:
    neighborhood_half_width: int = 5
    edge_threshold: float = 0.1
    planar_threshold: float = 0.01
    max_features_per_class: int = 64

    def __post_init__(self):
        if self.neighborhood_half_width < 1:
            raise ValueError("neighborhood_half_width must be >= 1")
        if not self.edge_threshold > self.planar_threshold >= 0:
            raise ValueError("need edge_threshold > planar_threshold >= 0")
        if self.max_features_per_class < 0:
            raise ValueError("max_features_per_class must be >= 0")


@dataclass(frozen=True)
class FeatureSet:
    edge_points: PointCloud
    planar_points: PointCloud
    frame_index: int = 0
    edge_indices: tuple = field(default=())
    planar_indices: tuple = field(default=())

    def __post_init__(self):
        if set(self.edge_indices) & set(self.planar_indices):
            raise ValueError("edge and planar features share source indices")

    @classmethod
    def from_arrays(cls, edges, planars, frame_index: int = 0) -> "FeatureSet":
        return cls(PointCloud(np.asarray(edges, float).reshape(-1, 3)),
                   PointCloud(np.asarray(planars, float).reshape(-1, 3)), frame_index)


def smoothness(scan, k: int, params: SmoothnessParams | int = SmoothnessParams()) -> float:
    """Local surface smoothness of point ``k`` of an ordered scan.

    ``params`` may be a :class:`SmoothnessParams` or a bare half-width.
    The neighbourhood holds ``h`` points on each side of ``k``; the summed
    difference vector is normalised by the neighbourhood size and the range
    of the point.
    """
    h = params if isinstance(params, int) else params.neighborhood_half_width
    pts = np.asarray(scan, dtype=float).reshape(-1, 3)
    if k - h < 0 or k + h >= len(pts):
        raise IndexOutOfNeighborhood(f"index {k} lacks {h} neighbours on each side in a scan of {len(pts)}")
    pk = pts[k]
    rng = float(np.linalg.norm(pk))
    if rng == 0.0:
        raise DegeneratePoint(f"point {k} is at the sensor origin")
    nbrs = np.concatenate([pts[k - h:k], pts[k + 1:k + h + 1]])
    diff = (pk - nbrs).sum(axis=0)
    return float(np.linalg.norm(diff) / (2 * h * rng))


def smoothness_profile(scan, params: SmoothnessParams) -> np.ndarray:
    """Smoothness for every index; NaN where undefined (scan ends, zero range)."""
    pts = np.asarray(scan, dtype=float).reshape(-1, 3)
    h = params.neighborhood_half_width
    n = len(pts)
    out = np.full(n, np.nan)
    if n <= 2 * h:
        return out
    csum = np.vstack([np.zeros(3), np.cumsum(pts, axis=0)])
    k = np.arange(h, n - h)
    window = csum[k + h + 1] - csum[k - h]  # includes p_k itself
    diff = (2 * h + 1) * pts[k] - window
    rng = np.linalg.norm(pts[k], axis=1)
    ok = rng > 0
    out[k[ok]] = np.linalg.norm(diff[ok], axis=1) / (2 * h * rng[ok])
    return out


def extract_features(scan, params: SmoothnessParams = SmoothnessParams(),
                     frame_index: int = 0) -> FeatureSet:
    pts = np.asarray(scan, dtype=float).reshape(-1, 3)
    h = params.neighborhood_half_width
    if len(pts) <= 2 * h:
        raise EmptyScan(f"scan has {len(pts)} points, need more than {2 * h}")
    c = smoothness_profile(pts, params)
    idx = np.flatnonzero(np.isfinite(c))
    cap = params.max_features_per_class

    edge = idx[c[idx] > params.edge_threshold]
    edge = edge[np.argsort(-c[edge], kind="stable")][:cap]
    planar = idx[c[idx] < params.planar_threshold]
    planar = planar[np.argsort(c[planar], kind="stable")][:cap]

    return FeatureSet(PointCloud(pts[edge]), PointCloud(pts[planar]), frame_index,
                      tuple(int(i) for i in edge), tuple(int(i) for i in planar))
