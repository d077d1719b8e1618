"""Planar poses, rigid 3D transforms and point clouds."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap ``a`` into (-pi, pi]."""
    w = math.remainder(a, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


@dataclass(frozen=True)
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def compose(self, other: "Pose2D") -> "Pose2D":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(self.x + c * other.x - s * other.y,
                      self.y + s * other.x + c * other.y,
                      self.theta + other.theta)

    def distance_to(self, x: float, y: float) -> float:
        return math.hypot(x - self.x, y - self.y)


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def matrix_to_rpy(r: np.ndarray) -> tuple[float, float, float]:
    pitch = math.asin(max(-1.0, min(1.0, -r[2, 0])))
    if abs(r[2, 0]) < 1.0 - 1e-12:
        roll = math.atan2(r[2, 1], r[2, 2])
        yaw = math.atan2(r[1, 0], r[0, 0])
    else:  # gimbal lock, fold everything into yaw
        roll = 0.0
        yaw = math.atan2(-r[0, 1], r[1, 1])
    return roll, pitch, yaw


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Transform3D:
    """Rigid transform ``p -> rotation @ p + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = _readonly(self.rotation)
        t = _readonly(self.translation).reshape(3)
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        # loose gate for construction; is_valid() applies the strict tolerance
        if (not np.all(np.isfinite(r)) or not np.allclose(r.T @ r, np.eye(3), atol=1e-6)
                or np.linalg.det(r) <= 0):
            raise ValueError("rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Transform3D":
        return cls()

    @classmethod
    def from_xyz_rpy(cls, tx=0.0, ty=0.0, tz=0.0, roll=0.0, pitch=0.0, yaw=0.0) -> "Transform3D":
        return cls(rpy_to_matrix(roll, pitch, yaw), [tx, ty, tz])

    @classmethod
    def translate(cls, tx=0.0, ty=0.0, tz=0.0) -> "Transform3D":
        return cls(np.eye(3), [tx, ty, tz])

    @classmethod
    def rot_z(cls, yaw: float) -> "Transform3D":
        return cls(rot_z(yaw), np.zeros(3))

    def to_xyz_rpy(self) -> tuple[float, float, float, float, float, float]:
        roll, pitch, yaw = matrix_to_rpy(self.rotation)
        tx, ty, tz = (float(v) for v in self.translation)
        return tx, ty, tz, roll, pitch, yaw

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def inverse(self) -> "Transform3D":
        rt = self.rotation.T
        return Transform3D(rt, -rt @ self.translation)

    def compose(self, other: "Transform3D") -> "Transform3D":
        return compose(self, other)

    def __matmul__(self, other: "Transform3D") -> "Transform3D":
        return compose(self, other)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def is_valid(self, tol: float = 1e-9) -> bool:
        r = self.rotation
        return (np.allclose(r.T @ r, np.eye(3), atol=tol)
                and abs(np.linalg.det(r) - 1.0) <= tol
                and bool(np.all(np.isfinite(self.translation))))

    def allclose(self, other: "Transform3D", atol: float = 1e-9) -> bool:
        return (np.allclose(self.rotation, other.rotation, atol=atol)
                and np.allclose(self.translation, other.translation, atol=atol))

    def rotation_angle(self) -> float:
        """Magnitude of the rotation in radians."""
        c = (np.trace(self.rotation) - 1.0) / 2.0
        return math.acos(max(-1.0, min(1.0, c)))

    def __repr__(self):
        tx, ty, tz, r, p, y = self.to_xyz_rpy()
        return (f"Transform3D(t=({tx:.6g}, {ty:.6g}, {tz:.6g}), "
                f"rpy=({r:.6g}, {p:.6g}, {y:.6g}))")


def compose(a: Transform3D, b: Transform3D) -> Transform3D:
    """Apply ``b`` first, then ``a`` (matrix product ``a @ b``)."""
    return Transform3D(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def relative_transform(t_i: Transform3D, t_ip1: Transform3D) -> Transform3D:
    """Odometry increment between consecutive poses, ``t_i^-1 @ t_ip1``."""
    return compose(t_i.inverse(), t_ip1)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    frame: str = "body"

    def __post_init__(self):
        pts = _readonly(np.asarray(self.points, dtype=float).reshape(-1, 3))
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains NaN or Inf coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_csv(cls, path, frame: str = "body") -> "PointCloud":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["x", "y", "z"]:
                raise ValueError(f"{path}: expected header 'x,y,z', got {header!r}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls(np.array(rows, dtype=float).reshape(-1, 3), frame)

    def to_csv(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "z"])
            for p in self.points:
                w.writerow([repr(float(v)) for v in p])


def transform_cloud(t: Transform3D, c: PointCloud, frame: str | None = None) -> PointCloud:
    return PointCloud(t.apply(c.points), frame or c.frame)
