"""Command-line entry point (``raidnav``).

Exit codes: 0 ok, 2 configuration or input error, 3 funnel breach
(emergency stop), 4 scan-match non-convergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import default_config, load_config
from .errors import ConfigError, EmptyScan, InsufficientCorrespondences
from .geometry import PointCloud, Transform3D
from .odometry.features import SmoothnessParams, extract_features
from .odometry.scan_match import ScanMatchOptions, scan_match
from .odometry.synthetic import random_transform, simulate_scan
from .odometry.voxel_map import VoxelFeatureMap
from .report import comparison_table, metrics_payload, write_json, write_run
from .scenario import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BREACH = 3
EXIT_NONCONVERGENCE = 4

log = logging.getLogger("raidnav")


def _load(args):
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load(args)
    rec = run_scenario(cfg)
    paths = write_run(rec, args.out_dir, figures=False if args.no_figures else None)
    for name, p in paths.items():
        print(f"{name}: {p}")
    if rec.estop:
        print(f"emergency stop at t={rec.estop_time:.3f} s", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    out_dir = Path(args.out_dir)
    results = {}
    breach = False
    for kind in ("raid", "pid"):
        rec = run_scenario(cfg, kind)
        write_run(rec, out_dir, figures=False if args.no_figures else None)
        results[kind] = metrics_payload(rec)
        breach |= rec.estop
    table = comparison_table(results["raid"], results["pid"])
    write_json(out_dir / f"{cfg['scenario_id']}_compare.json",
               {"config_hash": cfg.config_hash, "seed": cfg.seed, **results})
    (out_dir / f"{cfg['scenario_id']}_compare.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_BREACH if breach else EXIT_OK


def _parse_transform(text: str | None) -> Transform3D:
    if not text:
        return Transform3D.identity()
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 6 or not all(math.isfinite(v) for v in vals):
        raise ValueError("transform must be six finite numbers: tx,ty,tz,roll,pitch,yaw (radians)")
    return Transform3D.from_xyz_rpy(*vals)


def cmd_scan_match(args) -> int:
    a = PointCloud.from_csv(args.cloud_a)
    b = PointCloud.from_csv(args.cloud_b)
    initial = _parse_transform(args.initial)
    try:
        feats = extract_features(a.points, SmoothnessParams(max_features_per_class=args.max_features))
    except EmptyScan as exc:
        print(f"insufficient correspondences: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    if len(feats.edge_points) + len(feats.planar_points) == 0:
        print("insufficient correspondences: no features in cloud A", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    vmap = VoxelFeatureMap(args.voxel_size, b.points, b.points)
    opts = ScanMatchOptions(max_iterations=args.max_iterations)
    try:
        res = scan_match(feats, vmap, initial, opts)
    except InsufficientCorrespondences as exc:
        print(f"insufficient correspondences: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    print(json.dumps({**res.as_dict(), "converged": res.converged, "iterations": res.iterations,
                      "cost": res.cost, "n_edge": res.n_edge, "n_planar": res.n_planar},
                     indent=2, sort_keys=True))
    return EXIT_OK if res.converged else EXIT_NONCONVERGENCE


def cmd_gen_scan(args) -> int:
    """Write an ordered synthetic scan A, a copy B expressed in a random frame, and the truth."""
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    scan = simulate_scan(args.rings, args.azimuth)
    truth = random_transform(rng, args.max_translation, args.max_rotation_deg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    PointCloud(scan).to_csv(out / "scan_a.csv")
    PointCloud(truth.apply(scan)).to_csv(out / "scan_b.csv")
    keys = ("tx", "ty", "tz", "roll", "pitch", "yaw")
    write_json(out / "truth.json", dict(zip(keys, truth.to_xyz_rpy())))
    print(f"wrote {len(scan)} points to {out}")
    return EXIT_OK


def cmd_tune_pid(args) -> int:
    from .metrics import tune_pid

    cfg = _load(args)
    best, rows = tune_pid(cfg, progress=(lambda r: print(
        f"kp={r['kp']:g} ki={r['ki']:g} kd={r['kd']:g} sse={r['steady_state_error']:.4f} "
        f"overshoot={r['overshoot']:.2f}%", flush=True)) if args.verbose else None)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "pid_grid.json", {"config_hash": cfg.config_hash, "seed": cfg.seed,
                                        "best": best, "candidates": rows})
    print(json.dumps(best, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="raidnav", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp):
        sp.add_argument("--config", help="scenario JSON (defaults built in when omitted)")
        sp.add_argument("--out-dir", default="out")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--no-figures", action="store_true")

    sp = sub.add_parser("simulate", help="run one closed-loop scenario")
    scenario_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="run RAID and PID on the same scenario")
    scenario_args(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("tune-pid", help="grid-search PID gains on a scenario")
    scenario_args(sp)
    sp.set_defaults(func=cmd_tune_pid)

    sp = sub.add_parser("scan-match", help="register cloud A against cloud B")
    sp.add_argument("cloud_a")
    sp.add_argument("cloud_b")
    sp.add_argument("--initial", help="tx,ty,tz,roll,pitch,yaw (radians)")
    sp.add_argument("--voxel-size", type=float, default=0.01)
    sp.add_argument("--max-iterations", type=int, default=50)
    sp.add_argument("--max-features", type=int, default=1000, help="per class, taken from cloud A")
    sp.set_defaults(func=cmd_scan_match)

    sp = sub.add_parser("gen-scan", help="write a synthetic scan pair with known offset")
    sp.add_argument("--out-dir", default="scans")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--rings", type=int, default=64)
    sp.add_argument("--azimuth", type=int, default=720)
    sp.add_argument("--max-translation", type=float, default=0.2)
    sp.add_argument("--max-rotation-deg", type=float, default=3.0)
    sp.set_defaults(func=cmd_gen_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
