"""PID baseline sharing the RAID saturation path."""
from __future__ import annotations

from dataclasses import dataclass, field

from .raid import ActuatorLimits, saturate


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    limits: ActuatorLimits = field(default_factory=ActuatorLimits)

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("PID gains must be non-negative")


def pid_step(gains: PidGains, e: float, e_integral: float, e_prev: float | None, dt: float):
    """One PID update on the drive error ``e = v_bar - v``.

    Returns ``(u_raw, lam, lam_bar, u_safe, e_integral')``.  The integral is
    frozen while the output saturates in the direction the error pushes it
    (conditional-integration anti-windup).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    de = 0.0 if e_prev is None else (e - e_prev) / dt
    trial = e_integral + e * dt
    u_raw = gains.kp * e + gains.ki * trial + gains.kd * de
    lam, lam_bar, u_safe = saturate(gains.limits, u_raw)
    pushing_out = (u_raw > gains.limits.upper and e > 0) or (u_raw < gains.limits.lower and e < 0)
    if pushing_out:
        u_raw = gains.kp * e + gains.ki * e_integral + gains.kd * de
        lam, lam_bar, u_safe = saturate(gains.limits, u_raw)
        return u_raw, lam, lam_bar, u_safe, e_integral
    return u_raw, lam, lam_bar, u_safe, trial


class PidController:
    def __init__(self, gains: PidGains):
        self.gains = gains
        self.integral = 0.0
        self.prev = None

    def step(self, e: float, dt: float):
        u_raw, lam, lam_bar, u_safe, self.integral = pid_step(self.gains, e, self.integral, self.prev, dt)
        self.prev = e
        return u_raw, lam, lam_bar, u_safe
