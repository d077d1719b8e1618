"""Run configuration: JSON loading, defaults and cross-field validation."""
from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

DEFAULTS = {
    "scenario_id": "nominal",
    "duration_s": 60.0,
    "seed": 7,
    "control_dt": 0.001,
    "planner_dt": 0.01,
    "controller_kind": "raid",
    "initial_pose": [0.0, 0.0, 0.0],
    "shaping": {"enabled": True, "slew_rate": 0.4},
    "robot": {"wheelbase_width": 2.0, "v_max": 0.97, "wheel_radius": 0.5, "gear_ratio": 1.0},
    "path": {
        "file": None,
        "waypoints": None,
        "circle": {"center": [0.0, -5.0], "radius": 5.0, "n": 8, "clockwise": True},
        "lookahead": 1.0,
        "cruise_speed": 0.38,
        "arrival_tolerance": 0.25,
    },
    "controller": {
        "beta": 1.2,
        "kappa": 5.2,
        "funnel": {"o_ov": 0.30, "o_b": 0.11, "o_star": 9e-5},
        "limits": {"upper": 1250.0, "lower": -1250.0},
        "feedforward_gain": 3000.0,
        "feedforward_mode": "cancel",
        "phi_hat0": 0.1,
        "phi_max": 100.0,
        "epsilon_guard": None,
        "derivative_time_constant": 0.05,
    },
    "rbfn": {"n": 9, "width": 0.13},
    "plant": {
        "g_nominal": 1.0 / 1500.0,
        "tau": 0.5,
        "g_amplitude": 0.0,
        "g_frequency": 0.1,
        "g_speed_droop": 0.0,
        "friction": 0.0,
        "friction_speed": 0.05,
        "delta_bias": 0.0,
        "delta_cap": 0.5,
    },
    "slip_events": [],
    "pid": {"kp": 2000.0, "ki": 2000.0, "kd": 0.0},
    "metrics": {"band": 0.05, "step_threshold": 0.05, "nominal_radius": 5.0},
    "output": {"figures": True, "figure_format": "svg"},
}

SLIP_DEFAULT = {"side": "both", "g_scale": 0.6, "delta_add": -0.05}


def _merge(base: dict, over: dict, path: str, text: str | None):
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(_msg(f"unknown key '{where}'", key, text))
        if isinstance(base[key], dict) and base[key] and key != "circle":
            if not isinstance(val, dict):
                raise ConfigError(_msg(f"'{where}' must be an object", key, text))
            out[key] = _merge(base[key], val, where, text)
        elif isinstance(base[key], dict) and key == "circle":
            out[key] = None if val is None else _merge(base[key], val, where, text)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _line_of(key: str, text: str | None) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _msg(message: str, key: str | None, text: str | None) -> str:
    line = _line_of(key, text) if key else None
    return f"line {line}: {message}" if line else message


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully-defaulted configuration tree plus its provenance."""

    data: dict
    source: str | None = None

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def with_overrides(self, **changes) -> "RunConfig":
        """Return a copy with nested overrides, e.g. ``controller={"beta": 2}``."""
        return from_dict(_merge(self.data, changes, "", None), source=self.source)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def _check(cond: bool, message: str, key: str, text: str | None):
    if not cond:
        raise ConfigError(_msg(message, key, text))


def validate(d: dict, text: str | None = None) -> None:
    num = (int, float)
    _check(isinstance(d["duration_s"], num) and d["duration_s"] >= 0,
           "duration_s must be a non-negative number", "duration_s", text)
    _check(isinstance(d["seed"], int), "seed must be an integer", "seed", text)
    _check(d["control_dt"] > 0, "control_dt must be positive", "control_dt", text)
    ratio = d["planner_dt"] / d["control_dt"]
    _check(d["planner_dt"] >= d["control_dt"] and abs(ratio - round(ratio)) < 1e-9,
           "planner_dt must be an integer multiple of control_dt", "planner_dt", text)
    _check(d["controller_kind"] in ("raid", "pid"), "controller_kind must be 'raid' or 'pid'",
           "controller_kind", text)
    _check(len(d["initial_pose"]) == 3, "initial_pose must be [x, y, theta]", "initial_pose", text)
    _check(d["shaping"]["slew_rate"] > 0, "shaping.slew_rate must be positive", "slew_rate", text)

    for k, v in d["robot"].items():
        _check(isinstance(v, num) and v > 0, f"robot.{k} must be positive", k, text)

    p = d["path"]
    _check(p["lookahead"] > 0, "path.lookahead must be positive", "lookahead", text)
    _check(p["cruise_speed"] > 0, "path.cruise_speed must be positive", "cruise_speed", text)
    _check(p["file"] is not None or p["waypoints"] or p["circle"],
           "path needs 'file', 'waypoints' or 'circle'", "path", text)
    if p["circle"]:
        _check(p["circle"]["radius"] > 0 and p["circle"]["n"] >= 1,
               "path.circle needs radius > 0 and n >= 1", "circle", text)

    c = d["controller"]
    f = c["funnel"]
    _check(f["o_b"] > 0, "controller.funnel.o_b must be positive", "o_b", text)
    _check(f["o_ov"] >= f["o_b"], "controller.funnel.o_ov must be >= o_b", "o_ov", text)
    _check(f["o_star"] >= 0, "controller.funnel.o_star must be non-negative", "o_star", text)
    _check(c["limits"]["lower"] < c["limits"]["upper"],
           "controller.limits.lower must be below upper", "limits", text)
    _check(c["beta"] > 0, "controller.beta must be positive", "beta", text)
    _check(c["kappa"] > 0, "controller.kappa must be positive", "kappa", text)
    _check(d["control_dt"] * c["kappa"] / 2 < 1,
           "control_dt * kappa / 2 must be below 1 for a sign-preserving adaptive update",
           "kappa", text)
    _check(c["feedforward_gain"] > 0, "controller.feedforward_gain must be positive",
           "feedforward_gain", text)
    _check(c["feedforward_mode"] in ("cancel", "retain"),
           "controller.feedforward_mode must be 'cancel' or 'retain'", "feedforward_mode", text)
    _check(0 <= c["phi_hat0"] <= c["phi_max"], "controller.phi_hat0 must lie in [0, phi_max]",
           "phi_hat0", text)
    eps = c["epsilon_guard"]
    _check(eps is None or 0 < eps < f["o_b"] ** 2,
           "controller.epsilon_guard must lie in (0, o_b^2)", "epsilon_guard", text)

    r = d["rbfn"]
    _check(isinstance(r["n"], int) and r["n"] >= 1, "rbfn.n must be an integer >= 1", "n", text)
    _check(r["width"] > 0, "rbfn.width must be positive", "width", text)

    pl = d["plant"]
    _check(pl["g_nominal"] > 0, "plant.g_nominal must be positive", "g_nominal", text)
    _check(pl["tau"] > 0, "plant.tau must be positive", "tau", text)
    _check(0 <= pl["g_amplitude"] < 1 and 0 <= pl["g_speed_droop"] < 1,
           "plant gain modulation must keep g > 0", "g_amplitude", text)
    for ev in d["slip_events"]:
        _check(ev["t_start"] < ev["t_end"], "slip event needs t_start < t_end", "slip_events", text)
        _check(0 < ev["g_scale"] <= 1, "slip g_scale must lie in (0, 1]", "slip_events", text)
        _check(ev["side"] in ("R", "L", "both"), "slip side must be R, L or both", "slip_events", text)
    for side in ("R", "L"):
        worst = abs(pl["delta_bias"]) + sum(abs(ev["delta_add"]) for ev in d["slip_events"]
                                            if ev["side"] in (side, "both"))
        _check(worst <= pl["delta_cap"], f"disturbance on side {side} can exceed plant.delta_cap",
               "delta_cap", text)

    for k in ("kp", "ki", "kd"):
        _check(d["pid"][k] >= 0, f"pid.{k} must be non-negative", k, text)
    _check(0 < d["metrics"]["band"] < 1, "metrics.band must lie in (0, 1)", "band", text)

    # initial error must start inside the funnel unless shaping is deliberately off
    if d["shaping"]["enabled"]:
        _check(f["o_ov"] > math.sqrt(eps if eps else (0.02 * f["o_b"]) ** 2),
               "funnel too narrow for the emergency-stop guard", "o_ov", text)


def from_dict(raw: dict, text: str | None = None, source: str | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    data = _merge(DEFAULTS, raw, "", text)
    events = []
    for i, ev in enumerate(data["slip_events"]):
        if not isinstance(ev, dict) or "t_start" not in ev or "t_end" not in ev:
            raise ConfigError(_msg(f"slip_events[{i}] needs t_start and t_end", "slip_events", text))
        unknown = set(ev) - {"t_start", "t_end", "side", "g_scale", "delta_add"}
        if unknown:
            raise ConfigError(_msg(f"slip_events[{i}] has unknown keys {sorted(unknown)}",
                                   "slip_events", text))
        events.append({**SLIP_DEFAULT, **ev})
    data["slip_events"] = events
    try:
        validate(data, text)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed configuration: {exc}") from None
    return RunConfig(data, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        cfg = from_dict(raw, text, str(path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if cfg["path"]["file"]:
        wp = Path(cfg["path"]["file"])
        if not wp.is_absolute():
            cfg.data["path"]["file"] = str((path.parent / wp).resolve())
    return cfg


def default_config(**overrides) -> RunConfig:
    return from_dict(overrides)
