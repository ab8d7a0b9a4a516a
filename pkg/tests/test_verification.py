import numpy as np
import pytest

from pyreachavoid.core import MarginKind, Trajectory
from pyreachavoid.ilq import ILQSolver
from pyreachavoid.margins import constant, disk_target, never_failing
from pyreachavoid.objective import cost_to_go
from pyreachavoid.verification import (
    ProbeReport,
    brute_force_objective,
    brute_force_values,
    finite_difference_check,
    nash_probe,
    numerical_jacobian,
    sample_ball,
    time_consistency_probe,
)

from .conftest import two_player_toy


@pytest.fixture
def converged(toy, tight_config):
    return ILQSolver(toy, tight_config).solve()


def test_brute_force_single_step():
    assert brute_force_values([2.0, -1.0, 0.5], [-3.0, -3.0, 1.5], s=2) == 1.5
    assert brute_force_values([2.0, -1.0, 0.5], [-3.0, -3.0, -4.0], s=2) == 0.5


def test_brute_force_objective_matches_recursion_on_trajectory(rng):
    states = rng.normal(size=(16, 2))
    traj = Trajectory(states, [np.zeros((15, 2))], 0.1)
    target = disk_target([0.0, 0.0], 0.5)
    failure = constant(-0.2, MarginKind.FAILURE)
    J = cost_to_go(traj, target, failure)
    for s in range(16):
        assert brute_force_objective(traj, target, failure, s) == pytest.approx(J.at(s), abs=1e-12)


def test_affine_function_has_exact_differences():
    a = np.array([1.0, -2.0, 0.5])
    error = finite_difference_check(lambda x: a @ x + 3.0, lambda x: a, [np.zeros(3), np.ones(3)])
    assert error < 1e-9
    hessian = numerical_jacobian(lambda x: a, np.ones(3))
    assert not np.any(hessian)
    with pytest.raises(ValueError):
        numerical_jacobian(lambda x: x, np.zeros(2), h=0.0)


def test_sample_ball(rng):
    center = np.array([1.0, 2.0, 3.0])
    for _ in range(100):
        assert np.linalg.norm(sample_ball(rng, center, 0.5) - center) <= 0.5
    assert np.array_equal(sample_ball(rng, center, 0.0), center)


def test_report_serialization():
    report = ProbeReport("nash", values=[0.0, 2.0, 1.0], failures=1)
    data = report.to_dict()
    assert data["samples"] == 4
    assert data["excess_stats"] == {"min": 0.0, "median": 1.0, "max": 2.0}
    assert report.frequency_above(0.5) == pytest.approx(2 / 3)
    assert ProbeReport("tc").stats == {"min": None, "median": None, "max": None}


def test_zero_perturbation_has_zero_improvement(toy, converged):
    report = nash_probe(converged.strategy, toy, 0, delta_gamma=0.0, n_samples=5)
    assert report.values == [0.0] * 5


def test_convex_toy_admits_no_improvement(toy, converged):
    report = nash_probe(converged.strategy, toy, 0, n_samples=30, seed=1, eta=1e-2)
    assert report.failures == 0
    assert report.frequency_above(1e-9) == 0.0


def test_nash_probe_on_two_player_game(tight_config):
    scenario = two_player_toy()
    result = ILQSolver(scenario, tight_config).solve()
    for player in range(2):
        report = nash_probe(result.strategy, scenario, player, n_samples=10, seed=player, eta=tight_config.eta)
        assert report.frequency_above(1e-7) == 0.0


def test_nash_deviations_score_reach_avoid_value_by_default(toy, converged):
    report = nash_probe(converged.strategy, toy, 0, n_samples=3)
    assert report.parameters["eta"] == 0.0
    value = cost_to_go(converged.trajectory, toy.targets[0], toy.failures[0]).initial
    assert report.parameters["baseline"] == pytest.approx(value)


def test_unperturbed_resolve_keeps_strategy(toy, converged, tight_config):
    report = time_consistency_probe(converged.strategy, toy, 10, delta_x=0.0, n_samples=2, config=tight_config)
    assert report.failures == 0
    assert abs(report.stats["median"]) < 1e-2


def test_time_consistency_probe_is_seeded(toy, converged, tight_config):
    first = time_consistency_probe(converged.strategy, toy, 5, n_samples=3, config=tight_config, seed=2)
    second = time_consistency_probe(converged.strategy, toy, 5, n_samples=3, config=tight_config, seed=2)
    assert first.values == second.values
    assert first.samples == 3
    assert first.to_dict()["parameters"]["s"] == 5
    with pytest.raises(ValueError):
        time_consistency_probe(converged.strategy, toy, toy.horizon)


def test_reach_only_brute_force():
    assert brute_force_values([0.0] * 4, [-1.0] * 4) == 0.0
    traj = Trajectory(np.zeros((3, 1)), [np.zeros((2, 1))], 0.1)
    assert brute_force_objective(traj, constant(0.3, MarginKind.TARGET), never_failing()) == 0.3
