"""Tracking metrics, circle fitting and Lyapunov diagnostics over a run record."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BreachInTrace, DegenerateFit, EmptyRecord
from .scenario import RunRecord


@dataclass(frozen=True)
class StabilityMetrics:
    settling_time: float
    overshoot: float
    steady_state_error: float
    funnel_violations: int
    saturation_violations: int
    max_abs_u_safe: float
    settling_time_2pct: float = float("nan")

    def as_dict(self) -> dict:
        return asdict(self)


def _first_disturbance(record: RunRecord) -> float:
    starts = [ev["t_start"] for ev in record.config["slip_events"]]
    return min(starts) if starts else math.inf


def transient_window(record: RunRecord, side: str, step_threshold: float = 0.05) -> tuple[float, float]:
    """``(t0, t1)`` bracketing the start-up step response of one side.

    The run start is a step from rest to the planner's first command.  The
    reference counts as held until that side's command moves more than
    ``step_threshold`` m/s away from its value at the step, until the first
    scheduled disturbance, or until the record ends, whichever comes first.
    """
    t = record["t"]
    t1 = min(_first_disturbance(record), float(t[-1]) + record.dt)
    cmd = record[f"cmd_{side}"]
    moved = np.flatnonzero(np.abs(cmd - cmd[0]) > step_threshold)
    if len(moved):
        t1 = min(t1, float(t[moved[0]]))
    return float(t[0]), t1


def _settling(t, e, ref, band, t0, t1) -> float:
    sel = (t >= t0) & (t < t1)
    tt, ee, rr = t[sel], e[sel], ref[sel]
    if len(tt) == 0:
        return 0.0
    outside = np.flatnonzero(np.abs(ee) > band * np.maximum(np.abs(rr), 1e-9))
    if len(outside) == 0:
        return 0.0
    last = outside[-1]
    if last + 1 >= len(tt):
        return math.inf
    return float(tt[last + 1] - t0)


def compute_metrics(record: RunRecord, band: float = 0.05, step_threshold: float = 0.05,
                    final_fraction: float = 0.2) -> dict[str, StabilityMetrics]:
    """Per-side settling time, overshoot and steady-state error.

    * settling time: time from the start-up step until ``|e|`` stays within
      ``band * |v_bar|`` for the rest of the transient window (``inf`` if it
      never does);
    * overshoot: largest excursion of ``v`` past ``v_bar`` in the direction of
      travel, as a percentage of ``|v_bar|``, over the same window;
    * steady-state error: mean ``|e|`` over the last ``final_fraction`` of the run.
    """
    if len(record) == 0:
        raise EmptyRecord("record has no samples")
    if not 0 < band < 1:
        raise ValueError("band must lie in (0, 1)")
    t = record["t"]
    lim = record.config["controller"]["limits"]
    tail = t >= t[0] + (1.0 - final_fraction) * (t[-1] - t[0])
    out = {}
    for s in ("R", "L"):
        t0, t1 = transient_window(record, s, step_threshold)
        e = record.side("e", s)
        o = record.side("o", s)
        u = record.side("u_safe", s)
        ref = record[f"v_bar_{s}"]
        v = record[f"v_{s}"]

        sel = (t >= t0) & (t < t1)
        moving = sel & (np.abs(ref) > 1e-6)
        if np.any(moving):
            excess = np.sign(ref[moving]) * (v[moving] - ref[moving]) / np.abs(ref[moving])
            overshoot = max(0.0, float(excess.max())) * 100.0
        else:
            overshoot = 0.0

        breach = (o * o - e * e <= 0) | (record.side("estop", s) > 0)
        sat = (u > lim["upper"]) | (u < lim["lower"])
        out[s] = StabilityMetrics(
            settling_time=_settling(t, e, ref, band, t0, t1),
            overshoot=overshoot,
            steady_state_error=float(np.mean(np.abs(e[tail]))),
            funnel_violations=int(np.count_nonzero(breach)),
            saturation_violations=int(np.count_nonzero(sat)),
            max_abs_u_safe=float(np.max(np.abs(u))),
            settling_time_2pct=_settling(t, e, ref, 0.02, t0, t1),
        )
    return out


def fit_circle(x, y) -> tuple[float, float, float]:
    """Algebraic least-squares circle fit returning ``(cx, cy, r)``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 3:
        raise DegenerateFit("need at least three points")
    xm, ym = x.mean(), y.mean()
    u, v = x - xm, y - ym
    sv = np.linalg.svd(np.column_stack([u, v]), compute_uv=False)
    if sv[0] == 0 or sv[1] / sv[0] < 1e-6:
        raise DegenerateFit("trajectory is collinear")
    a = np.column_stack([2 * u, 2 * v, np.ones_like(u)])
    b = u * u + v * v
    (ua, va, c), *_ = np.linalg.lstsq(a, b, rcond=None)
    r = math.sqrt(c + ua * ua + va * va)
    extent = float(np.max(np.hypot(u, v)))
    if r > 1e4 * max(extent, 1e-12):
        raise DegenerateFit("fitted radius unbounded relative to trajectory extent")
    return float(ua + xm), float(va + ym), r


def trajectory_radius(record_or_xy, nominal: float = 5.0) -> tuple[float, float]:
    """Mean distance to the fitted circle centre and its error (%) against ``nominal``."""
    if isinstance(record_or_xy, RunRecord):
        x, y = record_or_xy["x"], record_or_xy["y"]
    else:
        x, y = record_or_xy
    cx, cy, _ = fit_circle(x, y)
    mean_r = float(np.mean(np.hypot(np.asarray(x) - cx, np.asarray(y) - cy)))
    return mean_r, abs(mean_r - nominal) / nominal * 100.0


def lyapunov_trace(record: RunRecord, lam_min: float = 1.0) -> dict[str, np.ndarray]:
    """Barrier Lyapunov values per side and summed, sample by sample."""
    out = {}
    for s in ("R", "L"):
        e = record.side("e", s)
        o = record.side("o", s)
        gap = o * o - e * e
        if np.any(gap <= 0) or np.any(record.side("estop", s) > 0):
            raise BreachInTrace(f"side {s} leaves the funnel; V undefined")
        ph = record.side("phi_hat", s)
        out[s] = 0.5 * np.log(o * o / gap) + 0.5 * lam_min * ph * ph
    out["total"] = out["R"] + out["L"]
    return out


@dataclass(frozen=True)
class EnvelopeFit:
    c_bar: float
    rho: float
    residual: float
    v0: float
    holds: bool

    def bound(self, t) -> np.ndarray:
        return self.c_bar * self.v0 * np.exp(-self.rho * np.asarray(t)) + self.residual

    def as_dict(self) -> dict:
        return asdict(self)


def fit_exponential_envelope(t, v, tail_fraction: float = 0.5) -> EnvelopeFit:
    """Fit ``V(t) <= c_bar V(t0) exp(-rho t) + r`` to a sampled trace.

    ``r`` is the largest value over the final ``tail_fraction`` of the trace;
    ``rho`` is the log-linear decay rate, before the tail, of the running upper
    envelope above the tail minimum; ``c_bar`` is the smallest constant (>= 1) making the
    bound hold at every sample.
    """
    t = np.asarray(t, float) - float(t[0])
    v = np.asarray(v, float)
    v0 = float(v[0])
    if v0 <= 0:
        raise ValueError("V(t0) must be positive")
    tail = t >= (1 - tail_fraction) * t[-1]
    r = float(v[tail].max())
    floor = float(v[tail].min())
    env = np.maximum.accumulate(v[::-1])[::-1]
    peak = int(np.argmax(env))
    # rate from the decay above the tail floor; r stays the conservative residual
    sel = np.flatnonzero((np.arange(len(v)) >= peak) & ~tail
                         & (env - floor > 1e-3 * max(env[peak] - floor, 1e-300)))
    if len(sel) >= 2 and t[sel[-1]] > t[sel[0]]:
        slope = np.polyfit(t[sel], np.log(env[sel] - floor), 1)[0]
        rho = float(-slope)
    else:
        rho = 0.0
    excess = np.maximum(v - r, 0.0) * np.exp(rho * t) / v0
    c_bar = max(1.0, float(excess.max()))
    fit = EnvelopeFit(c_bar, rho, r, v0, True)
    holds = bool(np.all(v <= fit.bound(t) * (1 + 1e-12) + 1e-15))
    return EnvelopeFit(c_bar, rho, r, v0, holds)


def scenario_summary(metrics: dict[str, StabilityMetrics]) -> dict:
    """Worst case over both sides, which is what scenario-level checks use."""
    r, l = metrics["R"], metrics["L"]
    return {
        "settling_time": max(r.settling_time, l.settling_time),
        "settling_time_2pct": max(r.settling_time_2pct, l.settling_time_2pct),
        "overshoot": max(r.overshoot, l.overshoot),
        "steady_state_error": max(r.steady_state_error, l.steady_state_error),
        "funnel_violations": r.funnel_violations + l.funnel_violations,
        "saturation_violations": r.saturation_violations + l.saturation_violations,
        "max_abs_u_safe": max(r.max_abs_u_safe, l.max_abs_u_safe),
    }


DEFAULT_PID_GRID = {
    "kp": (250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0),
    "ki": (0.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0),
    "kd": (0.0, 20.0),
}


def tune_pid(cfg, grid: dict | None = None, max_overshoot: float = 5.0, progress=None):
    """Exhaustive grid search for PID gains on ``cfg``.

    Picks the lowest worst-side steady-state error among candidates whose
    overshoot stays at or below ``max_overshoot`` percent.  Returns
    ``(best_gains, rows)`` where ``rows`` lists every candidate evaluated.
    """
    from itertools import product

    from .scenario import run_scenario

    grid = grid or DEFAULT_PID_GRID
    m = cfg["metrics"]
    rows = []
    best = None
    for kp, ki, kd in product(grid["kp"], grid["ki"], grid["kd"]):
        trial = cfg.with_overrides(pid={"kp": kp, "ki": ki, "kd": kd})
        rec = run_scenario(trial, "pid")
        summ = scenario_summary(compute_metrics(rec, m["band"], m["step_threshold"]))
        row = {"kp": kp, "ki": ki, "kd": kd, **summ}
        rows.append(row)
        if progress:
            progress(row)
        ok = summ["overshoot"] <= max_overshoot
        if ok and (best is None or summ["steady_state_error"] < best["steady_state_error"]):
            best = row
    if best is None:
        raise ValueError("no PID candidate meets the overshoot constraint")
    return {k: best[k] for k in ("kp", "ki", "kd")}, rows
