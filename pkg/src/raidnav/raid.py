"""Per-side safety-constrained adaptive barrier controller.

Each side of the robot owns a :class:`ControllerState`.  One control tick
checks the error against the performance funnel (latching an emergency stop
on breach), evaluates the RBF bank at the measured side velocity, computes the
barrier control term, integrates the adaptive gain and finally passes the
command plus pump feedforward through the saturation governor.  Commands are
in pump RPM; velocities in m/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .rbfn import RbfNetwork, RbfOutput, activate

FEEDFORWARD_MODES = ("cancel", "retain")


@dataclass(frozen=True)
class PerformanceFunnel:
    o_ov: float = 0.30       # transient bound, m/s
    o_b: float = 0.11        # steady-state bound, m/s
    o_star: float = 9e-5     # convergence rate, 1/s

    def __post_init__(self):
        if not self.o_ov >= self.o_b > 0:
            raise ValueError("funnel requires o_ov >= o_b > 0")
        if self.o_star < 0:
            raise ValueError("funnel rate o_star must be non-negative")


def funnel_value(f: PerformanceFunnel, t: float) -> tuple[float, float]:
    """Funnel width and its time derivative at ``t`` seconds."""
    if t < 0:
        raise ValueError("t must be non-negative")
    decay = (f.o_ov - f.o_b) * math.exp(-f.o_star * t)
    return decay + f.o_b, -f.o_star * decay


@dataclass(frozen=True)
class ActuatorLimits:
    upper: float = 1250.0
    lower: float = -1250.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("actuator limits require lower < upper")


@dataclass(frozen=True)
class PumpModel:
    """Hydraulic drivetrain inverse, side velocity (m/s) to pump speed (RPM)."""

    feedforward_gain: float = 3000.0
    V_p: float = 1.8e-5     # pump displacement, m^3/rev

    def __post_init__(self):
        if not self.feedforward_gain > 0 or not self.V_p > 0:
            raise ValueError("pump parameters must be positive")

    @classmethod
    def from_physical(cls, V_p: float, V_m: float, gear_ratio: float,
                      wheel_radius: float) -> "PumpModel":
        # wheel m/s -> motor rad/s -> flow m^3/s -> pump rev/s -> RPM
        gain = 60.0 * gear_ratio * V_m / (2.0 * math.pi * wheel_radius * V_p)
        return cls(gain, V_p)


def feedforward(pump: PumpModel, v_bar: float) -> float:
    return pump.feedforward_gain * v_bar


def saturate(limits: ActuatorLimits, u_raw: float) -> tuple[float, float, float]:
    """Saturation governor returning ``(lam, lam_bar, u_safe)``.

    ``lam * u_raw + lam_bar`` equals the clamp of ``u_raw`` to the limits; the
    returned ``u_safe`` is additionally pinned to the limits so float rounding
    in that sum can never push it outside them.
    """
    if u_raw > limits.upper:
        lam = 1.0 / (abs(u_raw) + 1.0)
        lam_bar = limits.upper - u_raw / (abs(u_raw) + 1.0)
    elif u_raw < limits.lower:
        lam = 1.0 / (abs(u_raw) + 1.0)
        lam_bar = limits.lower - u_raw / (abs(u_raw) + 1.0)
    else:
        lam, lam_bar = 1.0, 0.0
    u_safe = lam * u_raw + lam_bar
    return lam, lam_bar, min(max(u_safe, limits.lower), limits.upper)


@dataclass
class ControllerState:
    net: RbfNetwork
    beta: float = 1.2
    kappa: float = 5.2
    funnel: PerformanceFunnel = field(default_factory=PerformanceFunnel)
    limits: ActuatorLimits = field(default_factory=ActuatorLimits)
    pump: PumpModel = field(default_factory=PumpModel)
    phi_hat: float = 0.1
    phi_max: float = 100.0
    epsilon_guard: float | None = None     # defaults to (0.02 * o_b)^2
    feedforward_mode: str = "cancel"
    estopped: bool = False
    clamp_events: int = 0

    def __post_init__(self):
        if self.beta <= 0 or self.kappa <= 0:
            raise ValueError("beta and kappa must be positive")
        if self.feedforward_mode not in FEEDFORWARD_MODES:
            raise ValueError(f"feedforward_mode must be one of {FEEDFORWARD_MODES}")
        if self.epsilon_guard is None:
            self.epsilon_guard = (0.02 * self.funnel.o_b) ** 2
        if self.phi_hat < 0:
            raise ValueError("initial phi_hat must be non-negative")


@dataclass(frozen=True)
class ControlOutput:
    u: float
    u_raw: float
    u_safe: float
    lam: float
    lam_bar: float
    e: float
    o: float
    f: float
    phi_hat: float
    estop: bool


def estop_check(state: ControllerState, e: float, o: float) -> bool:
    """Latch the emergency stop when the error gets within the guard of the funnel."""
    if state.estopped or o * o - e * e <= state.epsilon_guard:
        state.estopped = True
    return state.estopped


def barrier_control(state: ControllerState, e: float, o: float, o_dot: float,
                    phi: RbfOutput, v_bar_dot: float, f: float = 0.0) -> float:
    """Barrier control term ``u`` (RPM).

    In ``cancel`` mode the feedforward ``f`` is subtracted here and added back
    by the governor input, so only the barrier terms reach the plant.  In
    ``retain`` mode the subtraction is omitted and the feedforward acts.
    """
    gap = o * o - e * e
    ph = state.phi_hat
    u = (-0.5 * state.beta * e
         - (o_dot * o_dot * e ** 3) / (o * o * gap)
         - (e / gap) * (ph ** 4 * phi.norm + phi.norm_sq + v_bar_dot * v_bar_dot + 1.0))
    if state.feedforward_mode == "cancel":
        u -= f
    return u


def adaptive_rate(state: ControllerState, e: float, o: float, phi: RbfOutput) -> float:
    ph = state.phi_hat
    s = e / (o * o - e * e)
    return -0.5 * state.kappa * ph + s * s * ph ** 3 * phi.norm


def adapt(state: ControllerState, e: float, o: float, phi: RbfOutput, dt: float) -> float:
    """Explicit Euler update of the adaptive gain, clamped to ``[0, phi_max]``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    new = state.phi_hat + dt * adaptive_rate(state, e, o, phi)
    if new < 0.0 or new > state.phi_max:
        state.clamp_events += 1
        new = min(max(new, 0.0), state.phi_max)
    state.phi_hat = new
    return new


def control_step(state: ControllerState, v_measured: float, v_bar: float, v_bar_dot: float,
                 t: float, dt: float) -> ControlOutput:
    e = v_measured - v_bar
    o, o_dot = funnel_value(state.funnel, t)
    f = feedforward(state.pump, v_bar)
    if estop_check(state, e, o):
        return ControlOutput(0.0, 0.0, 0.0, 1.0, 0.0, e, o, f, state.phi_hat, True)
    phi = activate(state.net, v_measured)
    u = barrier_control(state, e, o, o_dot, phi, v_bar_dot, f)
    adapt(state, e, o, phi, dt)
    u_raw = u + f
    lam, lam_bar, u_safe = saturate(state.limits, u_raw)
    return ControlOutput(u, u_raw, u_safe, lam, lam_bar, e, o, f, state.phi_hat, False)


def lyapunov_value(e: float, o: float, phi_hat: float, lam_min: float = 1.0) -> float:
    """Barrier Lyapunov function of one side (``lam_min`` fixed for monitoring)."""
    gap = o * o - e * e
    if gap <= 0:
        raise ValueError("error outside the funnel")
    return 0.5 * math.log(o * o / gap) + 0.5 * lam_min * phi_hat * phi_hat


class ReferenceShaper:
    """Slew-rate limiter on the side velocity reference.

    Starts from the measured velocity so the initial error sits inside the
    funnel; disabled shaping passes the command straight through.
    """

    def __init__(self, slew_rate: float = 0.4, enabled: bool = True):
        if slew_rate <= 0:
            raise ValueError("slew_rate must be positive")
        self.slew_rate = slew_rate
        self.enabled = enabled
        self.value = None

    def reset(self, measured: float) -> None:
        self.value = measured

    def update(self, command: float, dt: float) -> float:
        if not self.enabled:
            self.value = command
            return command
        if self.value is None:
            self.value = command
            return command
        step = self.slew_rate * dt
        self.value += min(max(command - self.value, -step), step)
        return self.value
