"""Gauss-Newton alignment of edge/planar features against a voxel map."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientCorrespondences
from ..geometry import Transform3D
from .features import FeatureSet
from .residuals import line_residuals, plane_normals, plane_residuals
from .voxel_map import VoxelFeatureMap

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanMatchOptions:
    max_iterations: int = 50
    tolerance: float = 1e-9           # step norm in the 6-parameter chart
    max_correspondence_distance: float = 1.0
    jacobian_step: float = 1e-6
    max_halvings: int = 12
    min_residuals: int = 6


@dataclass
class ScanMatchResult:
    transform: Transform3D
    converged: bool
    iterations: int
    cost: float
    n_edge: int
    n_planar: int
    # (cost before step, cost after accepted step) with correspondences held fixed
    cost_history: list = field(default_factory=list)

    def as_dict(self) -> dict:
        tx, ty, tz, roll, pitch, yaw = self.transform.to_xyz_rpy()
        return {"tx": tx, "ty": ty, "tz": tz, "roll": roll, "pitch": pitch, "yaw": yaw}


def _chart(xi) -> Transform3D:
    return Transform3D.from_xyz_rpy(*xi)


class _Correspondences:
    """Fixed edge lines and planar patches for one Gauss-Newton iteration."""

    def __init__(self, edge_src, line_a, line_b, plane_src, plane_u, plane_n):
        self.edge_src = edge_src
        self.line_a = line_a
        self.line_b = line_b
        self.plane_src = plane_src
        self.plane_u = plane_u
        self.plane_n = plane_n

    @property
    def count(self) -> int:
        return len(self.edge_src) + len(self.plane_src)

    def residuals(self, t: Transform3D) -> np.ndarray:
        parts = []
        if len(self.edge_src):
            parts.append(line_residuals(t.apply(self.edge_src), self.line_a, self.line_b).ravel())
        if len(self.plane_src):
            parts.append(plane_residuals(t.apply(self.plane_src), self.plane_u, self.plane_n))
        return np.concatenate(parts) if parts else np.zeros(0)

    def distances(self, t: Transform3D) -> np.ndarray:
        d = []
        if len(self.edge_src):
            d.append(np.linalg.norm(line_residuals(t.apply(self.edge_src), self.line_a, self.line_b), axis=1))
        if len(self.plane_src):
            d.append(np.abs(plane_residuals(t.apply(self.plane_src), self.plane_u, self.plane_n)))
        return np.concatenate(d) if d else np.zeros(0)


def find_correspondences(features: FeatureSet, vmap: VoxelFeatureMap, t: Transform3D,
                         gate: float) -> _Correspondences:
    """Nearest-neighbour lines (2 edge points) and patches (3 planar points)."""
    edge_src = features.edge_points.points
    plane_src = features.planar_points.points
    empty = np.zeros((0, 3))

    e_src, la, lb = empty, empty, empty
    if len(edge_src) and vmap.edge_tree is not None and len(vmap.edge_points) >= 2:
        d, idx = vmap.edge_tree.query(t.apply(edge_src), k=2)
        ok = np.all(d <= gate, axis=1)
        a = vmap.edge_points[idx[ok, 0]]
        b = vmap.edge_points[idx[ok, 1]]
        nondegenerate = np.linalg.norm(a - b, axis=1) >= 1e-12
        e_src, la, lb = edge_src[ok][nondegenerate], a[nondegenerate], b[nondegenerate]

    p_src, pu, pn = empty, empty, np.zeros((0, 3))
    if len(plane_src) and vmap.planar_tree is not None and len(vmap.planar_points) >= 3:
        d, idx = vmap.planar_tree.query(t.apply(plane_src), k=3)
        ok = np.all(d <= gate, axis=1)
        u = vmap.planar_points[idx[ok, 0]]
        v = vmap.planar_points[idx[ok, 1]]
        w = vmap.planar_points[idx[ok, 2]]
        normals, valid = plane_normals(u, v, w)
        p_src, pu, pn = plane_src[ok][valid], u[valid], normals[valid]

    return _Correspondences(e_src, la, lb, p_src, pu, pn)


def _numeric_jacobian(corr: _Correspondences, t: Transform3D, h: float) -> np.ndarray:
    cols = []
    for j in range(6):
        dp = np.zeros(6)
        dp[j] = h
        r_plus = corr.residuals(_chart(dp) @ t)
        r_minus = corr.residuals(_chart(-dp) @ t)
        cols.append((r_plus - r_minus) / (2.0 * h))
    return np.column_stack(cols)


def scan_match(features: FeatureSet, vmap: VoxelFeatureMap,
               initial: Transform3D | None = None,
               opts: ScanMatchOptions = ScanMatchOptions()) -> ScanMatchResult:
    """Estimate the transform taking ``features`` into the map frame.

    Each iteration re-associates correspondences by nearest neighbour, builds
    a central-difference Jacobian over (tx, ty, tz, roll, pitch, yaw) applied
    on the left of the current estimate, and takes a Gauss-Newton step that is
    halved until the squared residual does not increase.  Raises
    :class:`InsufficientCorrespondences` when fewer than ``opts.min_residuals``
    correspondences survive gating; non-convergence is reported through
    ``result.converged``.
    """
    if len(vmap) == 0:
        raise InsufficientCorrespondences("map is empty")
    t = initial if initial is not None else Transform3D.identity()
    history = []
    corr = None
    for it in range(1, opts.max_iterations + 1):
        corr = find_correspondences(features, vmap, t, opts.max_correspondence_distance)
        if corr.count < opts.min_residuals:
            raise InsufficientCorrespondences(
                f"only {corr.count} correspondences within {opts.max_correspondence_distance} m")
        r = corr.residuals(t)
        cost = 0.5 * float(r @ r)
        jac = _numeric_jacobian(corr, t, opts.jacobian_step)
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)

        scale = 1.0
        for _ in range(opts.max_halvings + 1):
            candidate = _chart(scale * step) @ t
            rc = corr.residuals(candidate)
            new_cost = 0.5 * float(rc @ rc)
            if new_cost <= cost:
                break
            scale *= 0.5
        else:
            # no descent along the Gauss-Newton direction: at a (local) minimum
            d = corr.distances(t)
            return ScanMatchResult(t, True, it, float(d.sum()), len(corr.edge_src),
                                   len(corr.plane_src), history)

        history.append((cost, new_cost))
        t = candidate
        if np.linalg.norm(scale * step) < opts.tolerance:
            d = corr.distances(t)
            return ScanMatchResult(t, True, it, float(d.sum()), len(corr.edge_src),
                                   len(corr.plane_src), history)

    log.warning("scan match did not converge in %d iterations", opts.max_iterations)
    d = corr.distances(t)
    return ScanMatchResult(t, False, opts.max_iterations, float(d.sum()),
                           len(corr.edge_src), len(corr.plane_src), history)
