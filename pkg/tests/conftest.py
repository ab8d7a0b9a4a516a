from typing import Optional, Sequence

import numpy as np
import pytest

from pyreachavoid.core import CriticalEntry, CriticalSet, LqApprox, MarginKind
from pyreachavoid.dynamics import Pedestrian, SystemSpec
from pyreachavoid.ilq import SolverOptions
from pyreachavoid.margins import disk_failure, halfplane_failure, negate, never_failing
from pyreachavoid.scenarios import InitialRegion, Scenario


def halfplane_target(normal, offset: float, position=(0, 1), name: str = "halfplane_target"):
    """l(x) = offset - normal . p(x): negative beyond the line."""
    return negate(halfplane_failure(normal, offset, position), MarginKind.TARGET, name)


def toy_scenario(horizon: int = 20, x0=(0.0, 0.0), velocity=(1.0, 0.2), obstacle: Optional[Sequence[float]] = None,
                 offset: float = 3.0) -> Scenario:
    """
    One unbounded single integrator that must cross the line x = offset;
    the target margin is affine. The initial controls move it toward the
    line so the margin decreases strictly along the initial rollout.
    """
    system = SystemSpec([Pedestrian(0.1, np.inf)], 0.1)
    target = halfplane_target([1.0, 0.0], offset)
    failure = never_failing() if obstacle is None else disk_failure(obstacle[:2], obstacle[2], name="obstacle")
    return Scenario(
        name="toy",
        system=system,
        targets=[target],
        failures=[failure],
        horizon=horizon,
        initial_state=np.array(x0, dtype=float),
        initial_controls=[np.tile(np.asarray(velocity, dtype=float), (horizon, 1))],
        initial_region=InitialRegion(np.array([-1.0, -1.0]), np.array([1.0, 1.0])),
    )


def two_player_toy(horizon: int = 20) -> Scenario:
    """Two single integrators heading for lines on opposite sides."""
    system = SystemSpec([Pedestrian(0.1, np.inf), Pedestrian(0.1, np.inf)], 0.1)
    targets = [
        halfplane_target([1.0, 0.0], 3.0, system.position_indices(0), "right"),
        halfplane_target([-1.0, 0.0], 3.0, system.position_indices(1), "left"),
    ]
    return Scenario(
        name="two_player_toy",
        system=system,
        targets=targets,
        failures=[never_failing(), never_failing()],
        horizon=horizon,
        initial_state=np.array([0.0, 1.0, 0.0, -1.0]),
        initial_controls=[np.tile([1.0, 0.1], (horizon, 1)), np.tile([-1.0, -0.1], (horizon, 1))],
    )


def random_lq_game(rng: np.random.Generator, n: int, dims: Sequence[int], horizon: int) -> LqApprox:
    """Random LQ game with PSD state costs at every step and PD control costs."""

    def psd(size: int, shift: float = 0.0) -> np.ndarray:
        M = rng.standard_normal((size, size))
        return M @ M.T / size + shift * np.eye(size)

    A = np.stack([np.eye(n) + 0.1 * rng.standard_normal((n, n)) for _ in range(horizon)])
    B = [rng.standard_normal((horizon, n, m)) for m in dims]
    Q = [np.stack([psd(n) for _ in range(horizon + 1)]) for _ in dims]
    q = [np.zeros((horizon + 1, n)) for _ in dims]
    R = [np.stack([psd(m, 1.0) for _ in range(horizon)]) for m in dims]
    r = [np.zeros((horizon, m)) for m in dims]
    return LqApprox(A, B, Q, q, R, r)


def critical_at(times: Sequence[int]) -> CriticalSet:
    return CriticalSet(tuple(CriticalEntry(tau, MarginKind.TARGET, None, 0.0) for tau in times))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def toy():
    return toy_scenario()


@pytest.fixture
def tight_config():
    return SolverOptions(subroutine="tc", tolerance=1e-10, max_iterations=50).factory()
