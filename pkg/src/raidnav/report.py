"""Run artifacts: CSV tables, JSON metadata/metrics and matplotlib figures."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BreachInTrace, DegenerateFit, EmptyRecord
from .metrics import (compute_metrics, fit_exponential_envelope, lyapunov_trace, scenario_summary,
                      trajectory_radius)
from .scenario import EXTRA_COLUMNS, SIDE_COLUMNS, TRAJECTORY_COLUMNS, RunRecord

CONTROL_COLUMNS = ("t",) + tuple(f"{c}_{s}" for s in ("R", "L") for c in SIDE_COLUMNS) + EXTRA_COLUMNS


def _fmt(x: float) -> str:
    # repr-exact, locale-free, stable across runs
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def write_csv(path, record: RunRecord, columns) -> Path:
    path = Path(path)
    cfg = record.config
    lines = [f"# config_hash={cfg.config_hash} seed={record.seed} scenario={record.scenario_id} "
             f"controller={record.controller_kind}",
             ",".join(columns)]
    cols = [record[c] for c in columns]
    for i in range(len(record)):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else ("-inf" if f < 0 else "nan"))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_metadata(record: RunRecord) -> dict:
    cfg = record.config
    return {
        "config_hash": cfg.config_hash,
        "seed": record.seed,
        "scenario_id": record.scenario_id,
        "controller": record.controller_kind,
        "version": __version__,
        "samples": len(record),
        "estop": record.estop,
        "estop_time": record.estop_time,
        "rbf_centers": record.centers,
        "config": cfg.data,
    }


def metrics_payload(record: RunRecord) -> dict:
    """Metrics JSON body; degrades gracefully for empty or breached runs."""
    cfg = record.config
    m = cfg["metrics"]
    out = {"config_hash": cfg.config_hash, "seed": record.seed, "scenario_id": record.scenario_id,
           "controller": record.controller_kind, "estop": record.estop,
           "estop_time": record.estop_time, "clamp_events": record.clamp_events}
    try:
        per_side = compute_metrics(record, m["band"], m["step_threshold"])
    except EmptyRecord:
        out["empty"] = True
        return out
    out["sides"] = {s: v.as_dict() for s, v in per_side.items()}
    out["summary"] = scenario_summary(per_side)
    try:
        r, err = trajectory_radius(record, m["nominal_radius"])
        out["trajectory_radius"] = {"mean_radius": r, "error_percent": err}
    except DegenerateFit:
        out["trajectory_radius"] = None
    if record.controller_kind == "raid" and len(record) > 1:
        try:
            v = lyapunov_trace(record)["total"]
            out["lyapunov_envelope"] = fit_exponential_envelope(record["t"], v).as_dict()
        except (BreachInTrace, ValueError):
            out["lyapunov_envelope"] = None
    return out


def render_figures(record: RunRecord, out_dir, fmt: str = "svg") -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    if len(record) == 0:
        return []
    meta = {"Date": None} if fmt == "svg" else {}
    stem = f"{record.scenario_id}_{record.controller_kind}"
    t = record["t"]
    lim = record.config["controller"]["limits"]
    paths = []

    def save(fig, name):
        p = out_dir / f"{stem}_{name}.{fmt}"
        fig.savefig(p, format=fmt, metadata=meta)
        plt.close(fig)
        paths.append(p)

    plt.rcParams["svg.hashsalt"] = "raidnav"
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, s in zip(axes, ("R", "L")):
        o = record.side("o", s)
        ax.plot(t, record.side("e", s), lw=0.8, label=f"e_{s}")
        ax.plot(t, o, "k--", lw=0.8, label="funnel")
        ax.plot(t, -o, "k--", lw=0.8)
        ax.set_ylabel("m/s")
        ax.legend(loc="upper right")
    axes[-1].set_xlabel("t [s]")
    save(fig, "error_funnel")

    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, s in zip(axes, ("R", "L")):
        ax.plot(t, record.side("u_safe", s), lw=0.8, label=f"U*_{s}")
        ax.axhline(lim["upper"], color="r", ls=":", lw=0.8)
        ax.axhline(lim["lower"], color="r", ls=":", lw=0.8)
        ax.set_ylabel("RPM")
        ax.legend(loc="upper right")
    axes[-1].set_xlabel("t [s]")
    save(fig, "actuation")

    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(record["x"], record["y"], lw=1.0, label="robot")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend()
    save(fig, "trajectory")

    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, s in zip(axes, ("R", "L")):
        ax.plot(t, record[f"v_{s}"], lw=0.8, label=f"v_{s}")
        ax.plot(t, record[f"v_bar_{s}"], lw=0.8, ls="--", label=f"v_bar_{s}")
        ax.set_ylabel("m/s")
        ax.legend(loc="upper right")
    axes[-1].set_xlabel("t [s]")
    save(fig, "velocity")
    return paths


def write_run(record: RunRecord, out_dir, figures: bool | None = None) -> dict[str, Path]:
    """Write every artifact of one run into ``out_dir`` and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{record.scenario_id}_{record.controller_kind}"
    out = {
        "trajectory": write_csv(out_dir / f"{stem}_trajectory.csv", record, TRAJECTORY_COLUMNS),
        "control": write_csv(out_dir / f"{stem}_control.csv", record, CONTROL_COLUMNS),
        "metadata": write_json(out_dir / f"{stem}_run.json", run_metadata(record)),
        "metrics": write_json(out_dir / f"{stem}_metrics.json", metrics_payload(record)),
    }
    opts = record.config["output"]
    if figures if figures is not None else opts["figures"]:
        for i, p in enumerate(render_figures(record, out_dir, opts["figure_format"])):
            out[f"figure_{i}"] = p
    return out


def comparison_table(raid: dict, pid: dict) -> str:
    """Plain-text side-by-side table of two ``metrics_payload`` results."""
    rows = [("metric", "RAID", "PID")]
    a, b = raid.get("summary"), pid.get("summary")
    if a is None or b is None:
        return "metric  RAID  PID\n(no samples)\n"
    for key in ("settling_time", "settling_time_2pct", "overshoot", "steady_state_error",
                "funnel_violations", "saturation_violations", "max_abs_u_safe"):
        rows.append((key, f"{a[key]:.4g}", f"{b[key]:.4g}"))
    w = [max(len(r[i]) for r in rows) for i in range(3)]
    return "\n".join("  ".join(c.ljust(w[i]) for i, c in enumerate(r)) for r in rows) + "\n"
