import numpy as np
import pytest

from pyreachavoid.core import DimensionError, DynamicsError
from pyreachavoid.dynamics import (
    Bicycle,
    BicycleState,
    ControlAllocation,
    Pedestrian,
    SystemSpec,
    bicycle_step,
    joint_step,
    pedestrian_step,
    simulate,
)
from pyreachavoid.scenarios import defensive_driving
from pyreachavoid.verification import subsystem_jacobian_errors


def test_bicycle_straight_line():
    nxt = bicycle_step(BicycleState(0.0, 0.0, 0.0, 0.0, 1.0), 0.0, 0.0, dt=0.1)
    np.testing.assert_allclose(nxt.to_array(), [0.1, 0.0, 0.0, 0.0, 1.0])


def test_bicycle_rejects_bad_step():
    with pytest.raises(DynamicsError):
        bicycle_step(BicycleState(0.0, 0.0, 0.0, 0.0, 1.0), 0.0, 0.0, dt=0.0)
    with pytest.raises(DynamicsError):
        Bicycle(wheelbase=-1.0)


def test_pedestrian_clamps_velocity():
    np.testing.assert_allclose(pedestrian_step([0.0, 0.0], [5.0, -1.0], 0.1, 2.0), [0.2, -0.1])


def test_pedestrian_saturated_input_has_no_effect():
    _, B = Pedestrian(0.1, 2.0).jacobians(np.zeros(2), np.array([3.0, 1.0]))
    np.testing.assert_allclose(B, np.diag([0.0, 0.1]))


def test_bicycle_jacobians_match_finite_differences():
    rng = np.random.default_rng(1)
    bicycle = Bicycle()
    points = []
    for _ in range(100):
        x = rng.uniform([-10, -10, -np.pi, -0.5, 0.0], [10, 10, np.pi, 0.5, 10.0])
        points.append((x, rng.uniform(-1.0, 1.0, 2)))
    state_error, input_error = subsystem_jacobian_errors(bicycle, points)
    assert state_error < 1e-5
    assert input_error < 1e-5


def test_joint_step_is_deterministic():
    system = SystemSpec([Bicycle(), Pedestrian()], 0.1)
    x = np.array([0.0, 0.0, 0.3, 0.1, 5.0, 1.0, 1.0])
    u = [np.array([0.1, 0.2]), np.array([1.0, 0.5])]
    first = joint_step(system, x, u, 0)
    assert np.array_equal(first, joint_step(system, x, u, 0))
    assert first.shape == (7,)
    np.testing.assert_allclose(first[5:], [1.1, 1.05])


def test_joint_step_checks_dimensions():
    system = SystemSpec([Pedestrian()], 0.1)
    with pytest.raises(DimensionError):
        joint_step(system, np.zeros(3), [np.zeros(2)], 0)
    with pytest.raises(DimensionError):
        joint_step(system, np.zeros(2), [np.zeros(3)], 0)


def test_linearization_is_block_diagonal():
    system = SystemSpec([Bicycle(), Pedestrian()], 0.1)
    A, B = system.linearize(np.array([0.0, 0.0, 0.3, 0.1, 5.0, 1.0, 1.0]), [np.zeros(2), np.zeros(2)], 0)
    assert A.shape == (7, 7)
    assert not np.any(A[:5, 5:]) and not np.any(A[5:, :5])
    assert not np.any(B[0][5:]) and not np.any(B[1][:5])


def test_allocation_phases():
    allocation = ControlAllocation(2, (1, 1), [(0, {0: [(0, 0)], 1: [(0, 1)]}), (3, {0: [(0, 1)]})])
    P0, P1 = allocation.at(2)
    assert np.array_equal(P0[:, 0], [1.0, 0.0]) and np.array_equal(P1[:, 0], [0.0, 1.0])
    P0, P1 = allocation.at(3)
    assert np.array_equal(P0[:, 0], [0.0, 1.0]) and not np.any(P1)
    with pytest.raises(ValueError):
        ControlAllocation(2, (1, 1), [(1, {})])


def test_oncoming_car_loses_control_after_reaction():
    scenario = defensive_driving(t_react=10)
    x, u = scenario.initial_state, [np.zeros(4), np.zeros(2)]
    _, before = scenario.system.linearize(x, u, 9)
    _, after = scenario.system.linearize(x, u, 10)
    assert np.any(before[1]) and not np.any(after[1])
    assert not np.any(before[0][5:])
    assert np.any(after[0][5:])


def test_simulate_open_loop():
    system = SystemSpec([Pedestrian(0.1, np.inf)], 0.1)
    traj = simulate(system, [0.0, 0.0], [np.tile([1.0, 2.0], (5, 1))], t0=3)
    assert traj.t0 == 3
    np.testing.assert_allclose(traj.states[-1], [0.5, 1.0])
