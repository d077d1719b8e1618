"""Closed-loop scenario runner: planner -> kinematics -> side controllers -> plant."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import path_following as pp
from .config import RunConfig
from .geometry import Pose2D
from .kinematics import ReferenceDerivative, RobotGeometry, wheel_speeds
from .pid import PidController, PidGains
from .plant import PlantParams, PlantState, SlipEvent, body_step, plant_step
from .raid import (ActuatorLimits, ControllerState, PerformanceFunnel, PumpModel,
                   ReferenceShaper, control_step)
from .rbfn import RbfNetwork, init_stochastic

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "x", "y", "theta", "v_R", "v_L", "v_bar_R", "v_bar_L")
SIDE_COLUMNS = ("e", "o", "u", "u_raw", "u_safe", "lambda", "lambda_bar", "phi_hat", "estop", "f")
EXTRA_COLUMNS = ("cmd_R", "cmd_L", "v_cmd", "omega_cmd", "target_index")


@dataclass
class RunRecord:
    scenario_id: str
    controller_kind: str
    seed: int
    config: RunConfig
    columns: dict
    estop: bool = False
    estop_time: float | None = None
    clamp_events: int = 0
    centers: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.columns["t"])

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]

    @property
    def dt(self) -> float:
        t = self.columns["t"]
        return float(t[1] - t[0]) if len(t) > 1 else self.config["control_dt"]

    def side(self, name: str, side: str) -> np.ndarray:
        return self.columns[f"{name}_{side}"]

    def downsample(self, factor: int) -> "RunRecord":
        cols = {k: v[::factor] for k, v in self.columns.items()}
        return RunRecord(self.scenario_id, self.controller_kind, self.seed, self.config, cols,
                         self.estop, self.estop_time, self.clamp_events, self.centers)


def build_path(cfg: RunConfig) -> pp.WaypointPath:
    p = cfg["path"]
    kw = dict(lookahead=p["lookahead"], cruise_speed=p["cruise_speed"],
              arrival_tolerance=p["arrival_tolerance"])
    if p["file"]:
        return pp.WaypointPath.from_csv(p["file"], **kw)
    if p["waypoints"]:
        return pp.WaypointPath(tuple(tuple(w) for w in p["waypoints"]), **kw)
    c = p["circle"]
    x0, y0, _ = cfg["initial_pose"]
    cx, cy = c["center"]
    start = math.atan2(y0 - cy, x0 - cx)
    return pp.WaypointPath(pp.circle_waypoints((cx, cy), c["radius"], c["n"], start, c["clockwise"]), **kw)


def build_plant(cfg: RunConfig) -> PlantParams:
    events = tuple(SlipEvent(**ev) for ev in cfg["slip_events"])
    return PlantParams(**cfg["plant"], slip_events=events)


def build_controllers(cfg: RunConfig) -> dict[str, ControllerState]:
    """One controller per side; both RBF banks are drawn from the run seed, R first."""
    c = cfg["controller"]
    rng = np.random.default_rng(cfg.seed)
    out = {}
    for side in ("R", "L"):
        net = init_stochastic(cfg["rbfn"]["n"], width=cfg["rbfn"]["width"], rng=rng)
        out[side] = ControllerState(
            net=net, beta=c["beta"], kappa=c["kappa"],
            funnel=PerformanceFunnel(**c["funnel"]),
            limits=ActuatorLimits(**c["limits"]),
            pump=PumpModel(c["feedforward_gain"]),
            phi_hat=c["phi_hat0"], phi_max=c["phi_max"],
            epsilon_guard=c["epsilon_guard"], feedforward_mode=c["feedforward_mode"])
    return out


def run_scenario(cfg: RunConfig, controller_kind: str | None = None) -> RunRecord:
    """Simulate the full loop for ``cfg['duration_s']`` seconds.

    The planner runs every ``planner_dt`` with a zero-order hold on its side
    references; controllers and plant run every ``control_dt``.  A latched
    emergency stop (funnel breach) ends the run after logging the breach row.
    """
    kind = controller_kind or cfg["controller_kind"]
    dt = cfg["control_dt"]
    n_steps = int(round(cfg["duration_s"] / dt))
    plan_every = int(round(cfg["planner_dt"] / dt))

    geom = RobotGeometry(**cfg["robot"])
    path = build_path(cfg)
    plant = build_plant(cfg)
    raid = build_controllers(cfg)
    centers = {s: list(c.net.centers) for s, c in raid.items()}
    limits = ActuatorLimits(**cfg["controller"]["limits"])
    pid = {s: PidController(PidGains(limits=limits, **cfg["pid"])) for s in ("R", "L")}
    shaping = cfg["shaping"]
    shapers = {s: ReferenceShaper(shaping["slew_rate"], shaping["enabled"]) for s in ("R", "L")}
    derivs = {s: ReferenceDerivative(dt, cfg["controller"]["derivative_time_constant"])
              for s in ("R", "L")}

    state = PlantState(0.0, 0.0, Pose2D(*cfg["initial_pose"]), 0.0)
    for s in ("R", "L"):
        shapers[s].reset(state.v_R if s == "R" else state.v_L)
    pstate = pp.PursuitState()

    names = list(TRAJECTORY_COLUMNS) + [f"{c}_{s}" for s in ("R", "L") for c in SIDE_COLUMNS] + list(EXTRA_COLUMNS)
    rows = {k: [] for k in names}
    cmd = wheel_speeds(0.0, 0.0, geom)
    body = pp.BodyCommand()
    estop = False
    estop_time = None

    for k in range(n_steps):
        t = k * dt
        if k % plan_every == 0:
            body, pstate = pp.step(state.pose, path, pstate, geom)
            cmd = wheel_speeds(body.v, body.omega, geom)

        measured = {"R": state.v_R, "L": state.v_L}
        commanded = {"R": cmd.v_bar_R, "L": cmd.v_bar_L}
        u_safe = {}
        for s in ("R", "L"):
            v_bar = shapers[s].update(commanded[s], dt)
            v_bar_dot = derivs[s].update(v_bar)
            rows[f"v_bar_{s}"].append(v_bar)
            if kind == "raid":
                out = control_step(raid[s], measured[s], v_bar, v_bar_dot, t, dt)
                vals = (out.e, out.o, out.u, out.u_raw, out.u_safe, out.lam, out.lam_bar,
                        out.phi_hat, out.estop, out.f)
                u_safe[s] = out.u_safe
                if out.estop:
                    estop = True
            else:
                e = measured[s] - v_bar
                o = raid[s].funnel.o_b + (raid[s].funnel.o_ov - raid[s].funnel.o_b) * math.exp(-raid[s].funnel.o_star * t)
                u_raw, lam, lam_bar, us = pid[s].step(-e, dt)
                vals = (e, o, u_raw, u_raw, us, lam, lam_bar, 0.0, False, 0.0)
                u_safe[s] = us
            for c, v in zip(SIDE_COLUMNS, vals):
                rows[f"{c}_{s}"].append(v)

        rows["t"].append(t)
        rows["x"].append(state.pose.x)
        rows["y"].append(state.pose.y)
        rows["theta"].append(state.pose.theta)
        rows["v_R"].append(state.v_R)
        rows["v_L"].append(state.v_L)
        rows["cmd_R"].append(cmd.v_bar_R)
        rows["cmd_L"].append(cmd.v_bar_L)
        rows["v_cmd"].append(body.v)
        rows["omega_cmd"].append(body.omega)
        rows["target_index"].append(pstate.current_target_index)

        if estop:
            estop_time = t
            log.warning("funnel breach at t=%.3f s; emergency stop latched", t)
            break
        state = body_step(state, geom, dt)
        state = plant_step(state, plant, u_safe["R"], u_safe["L"], dt)

    columns = {k: np.asarray(v, dtype=float) for k, v in rows.items()}
    clamps = sum(c.clamp_events for c in raid.values()) if kind == "raid" else 0
    return RunRecord(cfg["scenario_id"], kind, cfg.seed, cfg, columns, estop, estop_time,
                     clamps, centers)
