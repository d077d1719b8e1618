import math

import numpy as np
import pytest

from raidnav.config import default_config
from raidnav.errors import BreachInTrace, DegenerateFit, EmptyRecord
from raidnav.metrics import (compute_metrics, fit_circle, fit_exponential_envelope, lyapunov_trace,
                             scenario_summary, trajectory_radius)
from raidnav.scenario import EXTRA_COLUMNS, SIDE_COLUMNS, TRAJECTORY_COLUMNS, RunRecord, run_scenario


def synthetic_record(t, v, v_bar, phi_hat=0.0, o=0.3, cfg=None):
    """Both sides share the same signals; unused columns are zero."""
    cfg = cfg or default_config(slip_events=[])
    n = len(t)
    names = list(TRAJECTORY_COLUMNS) + [f"{c}_{s}" for s in ("R", "L") for c in SIDE_COLUMNS] + list(EXTRA_COLUMNS)
    cols = {k: np.zeros(n) for k in names}
    cols["t"] = np.asarray(t, float)
    for s in ("R", "L"):
        cols[f"v_{s}"] = np.asarray(v, float)
        cols[f"v_bar_{s}"] = np.broadcast_to(np.asarray(v_bar, float), (n,)).copy()
        cols[f"cmd_{s}"] = cols[f"v_bar_{s}"].copy()
        cols[f"e_{s}"] = cols[f"v_{s}"] - cols[f"v_bar_{s}"]
        cols[f"o_{s}"] = np.full(n, o)
        cols[f"phi_hat_{s}"] = np.full(n, phi_hat)
    return RunRecord("synthetic", "raid", 0, cfg, cols)


def test_zero_error_metrics():
    t = np.arange(0, 10, 0.001)
    m = compute_metrics(synthetic_record(t, np.full_like(t, 0.38), 0.38))
    for side in m.values():
        assert side.settling_time == 0.0 and side.overshoot == 0.0
        assert side.steady_state_error == 0.0
        assert side.funnel_violations == 0 and side.saturation_violations == 0


def test_first_order_settling_time():
    t = np.arange(0, 10, 0.001)
    rec = synthetic_record(t, 0.38 * (1 - np.exp(-t)), 0.38)
    m = compute_metrics(rec, band=0.05)["R"]
    assert m.settling_time == pytest.approx(-math.log(0.05), abs=2e-3)
    assert m.overshoot == 0.0


def test_overshoot_percentage():
    t = np.arange(0, 10, 0.001)
    v = 0.38 * (1 + 0.03 * np.exp(-((t - 5) ** 2)))
    assert compute_metrics(synthetic_record(t, v, 0.38))["L"].overshoot == pytest.approx(3.0, rel=1e-9)


def test_never_settles_is_inf():
    t = np.arange(0, 2, 0.001)
    m = compute_metrics(synthetic_record(t, np.zeros_like(t), 0.38))["R"]
    assert m.settling_time == math.inf


def test_metrics_stable_under_downsampling():
    t = np.arange(0, 10, 0.001)
    rec = synthetic_record(t, 0.38 * (1 - np.exp(-t)), 0.38)
    full = compute_metrics(rec)["R"]
    coarse = compute_metrics(rec.downsample(10))["R"]
    assert coarse.settling_time == pytest.approx(full.settling_time, rel=0.05)
    assert coarse.steady_state_error == pytest.approx(full.steady_state_error, rel=0.05)


def test_violations_counted():
    t = np.arange(0, 1, 0.1)
    rec = synthetic_record(t, np.full_like(t, 0.7), 0.38)
    rec.columns["u_safe_R"][3] = 2000.0
    m = compute_metrics(rec)
    assert m["R"].funnel_violations == len(t) and m["R"].saturation_violations == 1
    assert scenario_summary(m)["funnel_violations"] == 2 * len(t)


def test_empty_record_and_bad_band():
    rec = run_scenario(default_config(duration_s=0.0))
    assert len(rec) == 0 and not rec.estop
    with pytest.raises(EmptyRecord):
        compute_metrics(rec)
    t = np.arange(0, 1, 0.1)
    with pytest.raises(ValueError):
        compute_metrics(synthetic_record(t, t, 0.1), band=1.5)


def test_exact_circle_radius():
    a = np.linspace(0, 2 * math.pi, 200, endpoint=False)
    r, err = trajectory_radius((5 * np.cos(a) + 1, 5 * np.sin(a) - 5), 5.0)
    assert r == pytest.approx(5.0, abs=1e-12) and err == pytest.approx(0.0, abs=1e-10)


def test_noisy_circle_radius(rng):
    a = np.linspace(0, 2 * math.pi, 2000, endpoint=False)
    rad = 5.0 + rng.normal(0, 0.1, a.size)
    r, err = trajectory_radius((rad * np.cos(a), rad * np.sin(a)), 5.0)
    assert err <= 2.0


def test_straight_line_is_degenerate():
    x = np.linspace(0, 10, 50)
    with pytest.raises(DegenerateFit):
        fit_circle(x, 2 * x + 1)
    with pytest.raises(DegenerateFit):
        fit_circle([0, 1], [0, 1])


def test_lyapunov_trace_zero_and_breach():
    t = np.arange(0, 1, 0.01)
    v = lyapunov_trace(synthetic_record(t, np.full_like(t, 0.2), 0.2))
    assert np.all(v["total"] == 0.0)
    with pytest.raises(BreachInTrace):
        lyapunov_trace(synthetic_record(t, np.full_like(t, 0.6), 0.2))


def test_envelope_fit_recovers_decay():
    t = np.linspace(0, 20, 2001)
    v = 2.0 * np.exp(-0.5 * t) + 0.01
    fit = fit_exponential_envelope(t, v)
    assert fit.holds
    assert fit.rho == pytest.approx(0.5, rel=0.05)
    # residual is the tail maximum, an upper bound on the true floor of 0.01
    assert fit.residual == pytest.approx(2.0 * math.exp(-5.0) + 0.01, rel=1e-9)
    assert fit.c_bar >= 1.0
