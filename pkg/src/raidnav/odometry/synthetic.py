"""Synthetic scenes and LiDAR-like scans for exercising the odometry code."""
from __future__ import annotations

import math

import numpy as np

from ..geometry import Transform3D
from .features import FeatureSet


def random_transform(rng: np.random.Generator, max_translation: float = 0.5,
                     max_angle_deg: float = 10.0) -> Transform3D:
    """Uniform direction/magnitude translation and axis-angle rotation within bounds."""
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    t = d * rng.uniform(0.0, max_translation)
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = math.radians(rng.uniform(0.0, max_angle_deg))
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    r = np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)
    return Transform3D(r, t)


def room_features(rng: np.random.Generator, n_points: int = 500,
                  edge_fraction: float = 0.25) -> FeatureSet:
    """Edge points on box corner lines and planar points on the box faces plus a ramp.

    The box spans 6 x 5 x 3 m around the origin; every rigid degree of freedom
    is observable from the planar faces alone.
    """
    n_edge = max(6, int(round(n_points * edge_fraction)))
    n_plane = n_points - n_edge
    x0, x1, y0, y1, z0, z1 = -3.0, 3.0, -2.5, 2.5, -1.0, 2.0

    corners = [((x, y, z0), (x, y, z1)) for x in (x0, x1) for y in (y0, y1)]
    corners += [((x0, y0, z0), (x1, y0, z0)), ((x0, y1, z0), (x0, y0, z0))]
    which = rng.integers(len(corners), size=n_edge)
    s = rng.uniform(0.05, 0.95, size=n_edge)
    a = np.array([corners[i][0] for i in which])
    b = np.array([corners[i][1] for i in which])
    edges = a + s[:, None] * (b - a)

    faces = rng.integers(6, size=n_plane)
    u = rng.uniform(0.05, 0.95, size=n_plane)
    v = rng.uniform(0.05, 0.95, size=n_plane)
    planes = np.empty((n_plane, 3))
    for i, (f, uu, vv) in enumerate(zip(faces, u, v)):
        if f == 0:    # floor
            planes[i] = (x0 + uu * (x1 - x0), y0 + vv * (y1 - y0), z0)
        elif f == 1:  # wall x = x0
            planes[i] = (x0, y0 + uu * (y1 - y0), z0 + vv * (z1 - z0))
        elif f == 2:  # wall x = x1
            planes[i] = (x1, y0 + uu * (y1 - y0), z0 + vv * (z1 - z0))
        elif f == 3:  # wall y = y0
            planes[i] = (x0 + uu * (x1 - x0), y0, z0 + vv * (z1 - z0))
        elif f == 4:  # wall y = y1
            planes[i] = (x0 + uu * (x1 - x0), y1, z0 + vv * (z1 - z0))
        else:         # tilted ramp
            x = -1.0 + 2.0 * uu
            y = -1.0 + 2.0 * vv
            planes[i] = (x, y, z0 + 0.3 + 0.25 * x + 0.15 * y)
    return FeatureSet.from_arrays(edges, planes)


def _ray_box_exit(origin, dirs, lo, hi):
    """Distance along unit ``dirs`` from an interior ``origin`` to the box boundary."""
    with np.errstate(divide="ignore"):
        t_hi = (hi - origin) / dirs
        t_lo = (lo - origin) / dirs
    t_far = np.where(dirs > 0, t_hi, np.where(dirs < 0, t_lo, np.inf))
    return t_far.min(axis=1)


def _ray_box_entry(origin, dirs, lo, hi):
    """Entry distance into an exterior box, ``inf`` on a miss."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - origin) / dirs
        t2 = (hi - origin) / dirs
    tmin = np.nanmax(np.where(np.isnan(np.minimum(t1, t2)), -np.inf, np.minimum(t1, t2)), axis=1)
    tmax = np.nanmin(np.where(np.isnan(np.maximum(t1, t2)), np.inf, np.maximum(t1, t2)), axis=1)
    hit = (tmax >= tmin) & (tmin > 0)
    return np.where(hit, tmin, np.inf)


def simulate_scan(n_rings: int = 16, n_azimuth: int = 360,
                  elevation_deg: tuple[float, float] = (-15.0, 15.0),
                  sensor_height: float = 1.0) -> np.ndarray:
    """Ordered ring-by-ring scan of a room with a free-standing pillar, in the sensor frame."""
    room_lo = np.array([-5.0, -4.0, 0.0])
    room_hi = np.array([6.0, 4.5, 3.0])
    pillar_lo = np.array([2.0, 1.0, 0.0])
    pillar_hi = np.array([2.8, 1.8, 3.0])
    origin = np.array([0.0, 0.0, sensor_height])

    el = np.radians(np.linspace(elevation_deg[0], elevation_deg[1], n_rings))
    az = np.linspace(-math.pi, math.pi, n_azimuth, endpoint=False)
    E, A = np.meshgrid(el, az, indexing="ij")
    dirs = np.stack([np.cos(E) * np.cos(A), np.cos(E) * np.sin(A), np.sin(E)], axis=-1).reshape(-1, 3)

    t = np.minimum(_ray_box_exit(origin, dirs, room_lo, room_hi),
                   _ray_box_entry(origin, dirs, pillar_lo, pillar_hi))
    return dirs * t[:, None]
