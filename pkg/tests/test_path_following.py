import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from raidnav.errors import PathExhausted
from raidnav.geometry import Pose2D
from raidnav.kinematics import RobotGeometry
from raidnav.path_following import (BodyCommand, PursuitState, WaypointPath, angular_velocity,
                                    circle_waypoints, select_target, step, steering_angle)


def test_single_waypoint_target():
    path = WaypointPath(((5.0, 0.0),))
    target, d, _ = select_target(Pose2D(), path, PursuitState())
    assert target == (5.0, 0.0) and d == 5.0


def test_skips_waypoint_inside_lookahead():
    path = WaypointPath(((0.5, 0.0), (2.0, 0.0)))
    target, d, state = select_target(Pose2D(), path, PursuitState())
    assert target == (2.0, 0.0) and d == 2.0
    assert state.current_target_index == 1


def test_falls_back_to_last_waypoint():
    path = WaypointPath(((0.2, 0.0), (0.6, 0.0)))
    target, d, state = select_target(Pose2D(), path, PursuitState())
    assert target == (0.6, 0.0) and d == pytest.approx(0.6)


def test_arrival_finishes_path():
    path = WaypointPath(((3.0, 0.0),))
    with pytest.raises(PathExhausted) as info:
        select_target(Pose2D(2.9, 0.05), path, PursuitState())
    assert info.value.state.finished
    with pytest.raises(PathExhausted):
        select_target(Pose2D(), path, PursuitState(0, True))


def test_steering_examples():
    assert steering_angle(Pose2D(), (3.0, 0.0), 3.0, 1.0) == 0.0
    assert steering_angle(Pose2D(), (1.0, 1.0), math.sqrt(2), 1.0) == pytest.approx(math.pi / 4, abs=1e-12)
    behind_left = (2 * math.cos(3 * math.pi / 4), 2 * math.sin(3 * math.pi / 4))
    delta = steering_angle(Pose2D(), behind_left, 2.0, 1.0)
    assert delta == pytest.approx(math.atan(math.sqrt(2) / 2), abs=1e-12)
    assert delta == pytest.approx(0.6155, abs=1e-4)


def test_steering_is_heading_relative():
    # robot facing +y, target straight ahead
    assert steering_angle(Pose2D(0, 0, math.pi / 2), (0.0, 3.0), 3.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_angular_velocity_examples():
    assert angular_velocity(0.38, 0.0, 2.0) == 0.0
    assert angular_velocity(0.38, math.pi / 4, math.sqrt(2)) == pytest.approx(0.76 / math.sqrt(2), rel=1e-12)
    assert angular_velocity(0.38, math.pi / 4, math.sqrt(2)) == pytest.approx(0.5374, abs=1e-4)
    assert angular_velocity(0.0, 0.7, 1.5) == 0.0


def test_non_positive_distance_rejected():
    with pytest.raises(ValueError):
        steering_angle(Pose2D(), (1.0, 0.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        angular_velocity(0.3, 0.1, -1.0)


def test_finished_state_commands_stop():
    path = WaypointPath(((5.0, 0.0),))
    cmd, state = step(Pose2D(), path, PursuitState(0, True))
    assert cmd == BodyCommand(0.0, 0.0) and state.finished


def test_straight_path_ahead():
    path = WaypointPath(((10.0, 0.0),), cruise_speed=0.38)
    cmd, _ = step(Pose2D(), path, PursuitState())
    assert cmd == BodyCommand(0.38, 0.0)


def test_step_reaching_goal_sets_finished():
    path = WaypointPath(((1.0, 0.0),))
    cmd, state = step(Pose2D(0.9, 0.0), path, PursuitState())
    assert cmd == BodyCommand(0.0, 0.0) and state.finished


def mirror_pair(x, y):
    path = WaypointPath(((x, y),), arrival_tolerance=0.0)
    geom = RobotGeometry()
    a, _ = step(Pose2D(), path, PursuitState(), geom)
    b, _ = step(Pose2D(), WaypointPath(((x, -y),), arrival_tolerance=0.0), PursuitState(), geom)
    return a, b


def test_mirror_symmetry_random_targets(rng):
    for _ in range(1000):
        x, y = rng.uniform(-10, 10, 2)
        if math.hypot(x, y) < 1e-3:
            continue
        a, b = mirror_pair(x, y)
        assert abs(a.v - b.v) <= 1e-12
        assert abs(a.omega + b.omega) <= 1e-12


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(0.1, 5.0))
def test_steering_bounded_and_odd(x, y, lookahead):
    d = math.hypot(x, y)
    if d < 1e-6:
        return
    delta = steering_angle(Pose2D(), (x, y), d, lookahead)
    assert -math.pi / 2 < delta < math.pi / 2
    assert steering_angle(Pose2D(), (x, -y), d, lookahead) == pytest.approx(-delta, abs=1e-12)


def test_circle_waypoints_on_radius():
    wps = circle_waypoints((0.0, -5.0), 5.0, 8, start_angle=math.pi / 2)
    assert len(wps) == 8
    r = np.hypot([p[0] for p in wps], [p[1] + 5.0 for p in wps])
    np.testing.assert_allclose(r, 5.0, atol=1e-12)
    assert wps[-1] == pytest.approx((0.0, 0.0), abs=1e-12)


def test_waypoint_csv_roundtrip(tmp_path):
    path = WaypointPath(((0.0, 1.5), (2.25, -3.0)))
    path.to_csv(tmp_path / "wp.csv")
    assert WaypointPath.from_csv(tmp_path / "wp.csv").waypoints == path.waypoints
    (tmp_path / "bad.csv").write_text("x,y\n1,2\n3,oops\n")
    with pytest.raises(ValueError, match=":3:"):
        WaypointPath.from_csv(tmp_path / "bad.csv")
