"""Pure pursuit over a waypoint list, producing body (v, omega) commands."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

from .errors import PathExhausted
from .geometry import Pose2D, wrap_angle
from .kinematics import RobotGeometry, cap_speed


@dataclass(frozen=True)
class WaypointPath:
    waypoints: tuple
    lookahead: float = 1.0
    cruise_speed: float = 0.38
    arrival_tolerance: float = 0.25

    def __post_init__(self):
        wps = tuple((float(x), float(y)) for x, y in self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        if not wps:
            raise ValueError("path needs at least one waypoint")
        if self.lookahead <= 0:
            raise ValueError("lookahead must be positive")
        if self.cruise_speed <= 0:
            raise ValueError("cruise_speed must be positive")
        if self.arrival_tolerance < 0:
            raise ValueError("arrival_tolerance must be non-negative")

    @classmethod
    def from_csv(cls, path, **kwargs) -> "WaypointPath":
        wps = []
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].strip().lower() == "x":
                    continue
                try:
                    wps.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    raise ValueError(f"{path}:{lineno}: expected 'x,y', got {row!r}") from None
        return cls(tuple(wps), **kwargs)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y"])
            w.writerows(self.waypoints)


def circle_waypoints(center, radius: float, n: int = 8, start_angle: float = 0.0,
                     clockwise: bool = True) -> tuple:
    """``n`` waypoints on a circle, starting one step after ``start_angle`` and ending on it."""
    sgn = -1.0 if clockwise else 1.0
    cx, cy = center
    return tuple((cx + radius * math.cos(start_angle + sgn * 2 * math.pi * k / n),
                  cy + radius * math.sin(start_angle + sgn * 2 * math.pi * k / n))
                 for k in range(1, n + 1))


@dataclass(frozen=True)
class PursuitState:
    current_target_index: int = 0
    finished: bool = False


@dataclass(frozen=True)
class BodyCommand:
    v: float = 0.0
    omega: float = 0.0


def select_target(pose: Pose2D, path: WaypointPath, state: PursuitState):
    """Return ``(target, D_t, new_state)``.

    The target is the first waypoint at or after the current index lying at
    least one lookahead away; when none is left the last waypoint is used.
    Raises :class:`PathExhausted` (with ``.state`` finished) once the last
    waypoint is reached within the arrival tolerance.
    """
    if state.finished:
        raise PathExhausted("path already finished")
    wps = path.waypoints
    last = len(wps) - 1
    idx = last
    for j in range(state.current_target_index, len(wps)):
        if pose.distance_to(*wps[j]) >= path.lookahead:
            idx = j
            break
    target = wps[idx]
    d = pose.distance_to(*target)
    if idx == last and d <= path.arrival_tolerance:
        exc = PathExhausted("reached the final waypoint")
        exc.state = PursuitState(last, True)
        raise exc
    return target, d, replace(state, current_target_index=idx)


def heading_error(pose: Pose2D, target) -> float:
    return wrap_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)


def steering_angle(pose: Pose2D, target, D_t: float, L: float) -> float:
    if D_t <= 0:
        raise ValueError("D_t must be positive")
    alpha = heading_error(pose, target)
    return math.atan(2.0 * L * math.sin(alpha) / D_t)


def angular_velocity(v: float, delta: float, D_t: float) -> float:
    if D_t <= 0:
        raise ValueError("D_t must be positive")
    if delta == 0.0:
        return 0.0
    return 2.0 * v * math.tan(delta) / D_t


def step(pose: Pose2D, path: WaypointPath, state: PursuitState,
         geom: RobotGeometry = RobotGeometry()) -> tuple[BodyCommand, PursuitState]:
    if state.finished:
        return BodyCommand(0.0, 0.0), state
    try:
        target, d, state = select_target(pose, path, state)
    except PathExhausted as exc:
        return BodyCommand(0.0, 0.0), exc.state
    delta = steering_angle(pose, target, d, path.lookahead)
    v = cap_speed(path.cruise_speed, delta, d, geom)
    return BodyCommand(v, angular_velocity(v, delta, d)), state
