import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vbaisac.errors import InvalidInputError
from vbaisac.kinematics import (AoI, ControlInput, VehicleGeometry, VehicleState,
                                heading_rate, predict_aoi, predict_trajectory, propagate)

# Analytic integral of the frozen-rate model for the default scenario,
# cross-checked against 30-digit adaptive quadrature.
DEFAULT_WAYPOINTS = np.array([
    [1.25400963889628, 2.3027951220662],
    [1.98100183452878, 3.41860139934474],
    [3.0773764359639, 4.18233455254045],
])


@pytest.fixture
def scenario():
    state = VehicleState(1.0, 1.0, 20.0, 0.0)
    control = ControlInput(1.0, math.radians(30))
    geom = VehicleGeometry(2.0, 1.0)
    return state, control, geom


def test_default_waypoints_match_analytic_integral(scenario):
    traj = predict_trajectory(*scenario, horizon=0.2, stages=3)
    assert len(traj) == 4
    np.testing.assert_allclose(traj.positions[1:], DEFAULT_WAYPOINTS, atol=1e-8)


def test_default_waypoints_first_quadrant_and_increasing(scenario):
    aoi = predict_aoi(predict_trajectory(*scenario, horizon=0.2, stages=3), scenario[2])
    assert len(aoi) == 3
    assert np.all(aoi.centers > 0)
    assert np.all(np.diff(aoi.centers, axis=0) > 0)
    assert aoi.radius == 1.0
    np.testing.assert_allclose(aoi.origin, [1.0, 1.0])


def test_halving_step_moves_waypoints_below_micrometre(scenario):
    coarse = predict_trajectory(*scenario, horizon=0.2, stages=3, step=1e-3)
    fine = predict_trajectory(*scenario, horizon=0.2, stages=3, step=5e-4)
    assert np.abs(coarse.positions - fine.positions).max() < 1e-6


def test_straight_line_spacing():
    state = VehicleState(0.0, 0.0, 20.0, 0.0)
    traj = predict_trajectory(state, ControlInput(0.0, 0.0), VehicleGeometry(2.0, 1.0),
                              horizon=0.3, stages=3)
    pos = traj.positions
    np.testing.assert_allclose(pos[:, 0], 0.0, atol=1e-12)
    np.testing.assert_allclose(np.diff(pos[:, 1]), 20.0 * 0.1, atol=1e-10)


def test_constant_speed_turn_stays_on_circle():
    # rate > 0 turns toward +x, so the centre lies at distance l/tan(phi) on +x
    geom = VehicleGeometry(2.0, 1.0)
    phi = math.radians(30)
    radius = geom.wheelbase / math.tan(phi)
    state = VehicleState(1.0, 1.0, 20.0, 0.0)
    traj = predict_trajectory(state, ControlInput(0.0, phi), geom, horizon=0.2, stages=5)
    centre = np.array([1.0 + radius, 1.0])
    np.testing.assert_allclose(np.hypot(*(traj.positions - centre).T), radius, atol=1e-6)


def test_heading_rate_and_straight_threshold():
    s = VehicleState(0, 0, 10.0, 0.0)
    g = VehicleGeometry(2.5, 1.0)
    assert heading_rate(s, ControlInput(0, 0.2), g) == pytest.approx(10 * math.tan(0.2) / 2.5)
    assert heading_rate(s, ControlInput(0, 1e-14), g) == 0.0


def test_heading_wraps():
    assert VehicleState(0, 0, 1, 3 * math.pi).heading == pytest.approx(math.pi)
    assert VehicleState(0, 0, 1, -math.pi).heading == pytest.approx(math.pi)


@pytest.mark.parametrize("kwargs", [dict(horizon=0.0, stages=3), dict(horizon=0.2, stages=0)])
def test_prediction_rejects_bad_horizon(scenario, kwargs):
    with pytest.raises(InvalidInputError):
        predict_trajectory(*scenario, **kwargs)


def test_invalid_inputs():
    with pytest.raises(InvalidInputError, match="invalid-steer"):
        ControlInput(0.0, math.pi / 2)
    with pytest.raises(InvalidInputError):
        VehicleState(0, 0, -1.0, 0)
    with pytest.raises(InvalidInputError):
        VehicleGeometry(0.0, 1.0)


def test_aoi_needs_two_samples(scenario):
    traj = predict_trajectory(*scenario, horizon=0.2, stages=1)
    short = type(traj)(traj.times[:1], traj.states[:1])
    with pytest.raises(InvalidInputError, match="empty-trajectory"):
        predict_aoi(short, scenario[2])


@settings(max_examples=40, deadline=None)
@given(v=st.floats(0.0, 30.0), accel=st.floats(-2.0, 2.0), steer=st.floats(-0.6, 0.6),
       heading=st.floats(-3.0, 3.0), t1=st.floats(0.01, 0.2), t2=st.floats(0.01, 0.2))
def test_two_steps_compose_into_one(v, accel, steer, heading, t1, t2):
    # Keep the speed non-negative over the whole interval.
    accel = max(accel, -v / (t1 + t2))
    state = VehicleState(0.0, 0.0, v, heading)
    control = ControlInput(accel, steer)
    geom = VehicleGeometry(2.0, 1.0)
    rate = heading_rate(state, control, geom)
    step = 1e-4
    mid = propagate(state, control, geom, t1, rate=rate, step=step)
    two = propagate(mid, control, geom, t2, rate=rate, step=step)
    one = propagate(state, control, geom, t1 + t2, rate=rate, step=step)
    assert abs(two.x - one.x) < 1e-6 and abs(two.y - one.y) < 1e-6
    assert abs(math.remainder(two.heading - one.heading, 2 * math.pi)) < 1e-9
    assert two.v == pytest.approx(one.v, abs=1e-9)


def test_aoi_centres_are_relative(scenario):
    aoi = predict_aoi(predict_trajectory(*scenario, horizon=0.2, stages=3), scenario[2])
    np.testing.assert_allclose(aoi.centers, DEFAULT_WAYPOINTS - 1.0, atol=1e-8)
    assert isinstance(aoi, AoI)
