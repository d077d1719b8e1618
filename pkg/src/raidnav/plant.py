"""Simulated skid-steer drivetrain: per-side actuation dynamics plus planar body motion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import Pose2D
from .kinematics import RobotGeometry, body_velocity

SIDES = ("R", "L")


@dataclass(frozen=True)
class SlipEvent:
    t_start: float
    t_end: float
    side: str = "both"
    g_scale: float = 0.6
    delta_add: float = -0.05

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError("slip event needs t_start < t_end")
        if self.side not in ("R", "L", "both"):
            raise ValueError("slip side must be 'R', 'L' or 'both'")
        if not 0 < self.g_scale <= 1:
            raise ValueError("slip g_scale must lie in (0, 1]")

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_end

    def applies_to(self, side: str) -> bool:
        return self.side == "both" or self.side == side


@dataclass(frozen=True)
class PlantParams:
    """Side dynamics ``dv/dt = g(v, t) U + d(v) + Delta(t)``.

    ``g`` is the nominal gain modulated by a sinusoid in time (``g_amplitude``,
    ``g_frequency``) and a decreasing factor in speed (``g_speed_droop``); ``d``
    is linear drag ``-v/tau`` plus smooth Coulomb-like friction; ``Delta`` is a
    constant bias plus any active slip events.
    """

    g_nominal: float = 1.0 / 1500.0
    tau: float = 0.5
    g_amplitude: float = 0.0
    g_frequency: float = 0.1
    g_speed_droop: float = 0.0
    friction: float = 0.0
    friction_speed: float = 0.05
    delta_bias: float = 0.0
    delta_cap: float = 0.5
    slip_events: tuple = field(default=())

    def __post_init__(self):
        if self.g_nominal <= 0:
            raise ValueError("plant.g_nominal must be positive")
        if not self.tau > 0:
            raise ValueError("plant.tau must be positive")
        if not 0 <= self.g_amplitude < 1 or not 0 <= self.g_speed_droop < 1:
            raise ValueError("gain modulation must keep g strictly positive")
        if self.friction_speed <= 0:
            raise ValueError("plant.friction_speed must be positive")
        object.__setattr__(self, "slip_events", tuple(self.slip_events))
        for side in SIDES:
            worst = abs(self.delta_bias) + sum(abs(ev.delta_add) for ev in self.slip_events
                                               if ev.applies_to(side))
            if worst > self.delta_cap:
                raise ValueError(f"disturbance on side {side} may reach {worst}, "
                                 f"above plant.delta_cap={self.delta_cap}")

    @property
    def g_bounds(self) -> tuple[float, float]:
        lo = self.g_nominal * (1 - self.g_amplitude) * (1 - self.g_speed_droop)
        return lo, self.g_nominal * (1 + self.g_amplitude)

    def gain(self, v: float, t: float) -> float:
        g = self.g_nominal
        if self.g_amplitude:
            g *= 1.0 + self.g_amplitude * math.sin(2.0 * math.pi * self.g_frequency * t)
        if self.g_speed_droop:
            g *= 1.0 - self.g_speed_droop * abs(v) / (1.0 + abs(v))
        return g

    def drift(self, v: float) -> float:
        d = -v / self.tau if math.isfinite(self.tau) else 0.0
        if self.friction:
            d -= self.friction * math.tanh(v / self.friction_speed)
        return d


@dataclass(frozen=True)
class PlantState:
    v_R: float = 0.0
    v_L: float = 0.0
    pose: Pose2D = field(default_factory=Pose2D)
    t: float = 0.0


def schedule_slip(events, t: float) -> dict[str, tuple[float, float]]:
    """Effective ``(g_scale, delta_add)`` per side at time ``t``.

    Overlapping events multiply their gain scales and add their disturbances.
    """
    out = {}
    for side in SIDES:
        g, d = 1.0, 0.0
        for ev in events:
            if ev.applies_to(side) and ev.active(t):
                g *= ev.g_scale
                d += ev.delta_add
        out[side] = (g, d)
    return out


def _rk4(f, v: float, dt: float) -> float:
    k1 = f(v)
    k2 = f(v + 0.5 * dt * k1)
    k3 = f(v + 0.5 * dt * k2)
    k4 = f(v + dt * k3)
    return v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def plant_step(state: PlantState, params: PlantParams, u_safe_R: float, u_safe_L: float,
               dt: float) -> PlantState:
    """Advance both side velocities by ``dt`` with RK4.

    Time-dependent terms (gain modulation, slip, disturbance) are held at their
    value at the start of the step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    t = state.t
    slip = schedule_slip(params.slip_events, t) if params.slip_events else {"R": (1.0, 0.0), "L": (1.0, 0.0)}
    new_v = {}
    for side, v, u in (("R", state.v_R, u_safe_R), ("L", state.v_L, u_safe_L)):
        g_scale, delta_add = slip[side]
        delta = params.delta_bias + delta_add
        assert abs(delta) <= params.delta_cap + 1e-12, "disturbance exceeds declared cap"

        def rhs(x, g_scale=g_scale, delta=delta, u=u):
            return g_scale * params.gain(x, t) * u + params.drift(x) + delta

        new_v[side] = _rk4(rhs, v, dt)
    return replace(state, v_R=new_v["R"], v_L=new_v["L"], t=t + dt)


def body_step(state: PlantState, geom: RobotGeometry, dt: float) -> PlantState:
    """Explicit Euler unicycle update of the pose from the current side velocities."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v, omega = body_velocity(state.v_R, state.v_L, geom)
    p = state.pose
    pose = Pose2D(p.x + v * math.cos(p.theta) * dt,
                  p.y + v * math.sin(p.theta) * dt,
                  p.theta + omega * dt)
    return replace(state, pose=pose)
