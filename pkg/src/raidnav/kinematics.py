"""Skid-steer inverse kinematics, the turning speed cap and reference differentiation."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RobotGeometry:
    wheelbase_width: float = 2.0   # L_r, m
    v_max: float = 0.97            # m/s
    wheel_radius: float = 0.5      # m
    gear_ratio: float = 1.0

    def __post_init__(self):
        for name in ("wheelbase_width", "v_max", "wheel_radius", "gear_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"robot.{name} must be positive")


@dataclass(frozen=True)
class SideVelocityRefs:
    v_bar_R: float
    v_bar_L: float
    v_bar_dot_R: float = 0.0
    v_bar_dot_L: float = 0.0


def wheel_speeds(v: float, omega: float, geom: RobotGeometry) -> SideVelocityRefs:
    half = omega * geom.wheelbase_width / 2.0
    return SideVelocityRefs(v + half, v - half)


def body_velocity(v_R: float, v_L: float, geom: RobotGeometry) -> tuple[float, float]:
    """Forward kinematics: side velocities back to (v, omega)."""
    return (v_R + v_L) / 2.0, (v_R - v_L) / geom.wheelbase_width


def speed_cap(delta: float, D_t: float, geom: RobotGeometry) -> float:
    # |tan| keeps the bound symmetric for left and right turns
    return geom.v_max / (2.0 * (1.0 + abs(math.tan(delta)) * geom.wheelbase_width / D_t))


def cap_speed(v_desired: float, delta: float, D_t: float, geom: RobotGeometry) -> float:
    """Limit the linear speed so neither side exceeds ``v_max`` while turning."""
    if D_t <= 0:
        raise ValueError("D_t must be positive")
    if not abs(delta) < math.pi / 2:
        raise ValueError("|delta| must be below pi/2")
    return min(v_desired, speed_cap(delta, D_t, geom))


class ReferenceDerivative:
    """Backward difference of a sampled reference followed by a first-order low-pass."""

    def __init__(self, dt: float, time_constant: float = 0.05):
        if dt <= 0 or time_constant < 0:
            raise ValueError("dt must be positive and time_constant non-negative")
        self.dt = dt
        self.alpha = dt / (time_constant + dt)
        self.prev = None
        self.value = 0.0

    def update(self, ref: float) -> float:
        raw = 0.0 if self.prev is None else (ref - self.prev) / self.dt
        self.prev = ref
        self.value += self.alpha * (raw - self.value)
        return self.value
