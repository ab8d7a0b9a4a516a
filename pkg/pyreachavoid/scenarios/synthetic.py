from typing import List

import numpy as np

from ..dynamics.pedestrian import Pedestrian
from ..dynamics.system import SystemSpec
from ..margins.combinators import combine_max
from ..margins.margin import MarginFn, never_failing
from ..margins.shapes import disk_target, pairwise_distance_failure
from .geometry import Disk, Role
from .scenario import Scenario


def synthetic_crowd(num_players: int, horizon: int = 50, radius: float = 5.0, goal_radius: float = 0.5,
                    clearance: float = 0.5, dt: float = 0.1) -> Scenario:
    """
    Unbounded single integrators spaced on a circle, each reaching the
    antipodal point while keeping clear of the others. The initial controls
    head straight for the goals at constant speed.
    """
    angles = 2 * np.pi * np.arange(num_players) / num_players
    starts = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    goals = -starts
    system = SystemSpec([Pedestrian(dt, np.inf) for _ in range(num_players)], dt,
                        names=[f"agent_{i}" for i in range(num_players)])
    positions = [system.position_indices(i) for i in range(num_players)]
    targets = [disk_target(goals[i], goal_radius, positions[i], name=f"goal_{i}") for i in range(num_players)]
    failures: List[MarginFn] = []
    for i in range(num_players):
        collisions = [
            pairwise_distance_failure(positions[i], positions[j], clearance, name=f"collision_{i}{j}")
            for j in range(num_players) if j != i
        ]
        failures.append(combine_max(collisions, name=f"failure_{i}") if collisions else never_failing())
    velocity = (goals - starts) / (horizon * dt)
    return Scenario(
        name=f"crowd_{num_players}",
        system=system,
        targets=targets,
        failures=failures,
        horizon=horizon,
        initial_state=starts.ravel(),
        initial_controls=[np.tile(v, (horizon, 1)) for v in velocity],
        geometry=tuple(Disk(tuple(goal), goal_radius, Role.TARGET, f"goal_{i}") for i, goal in enumerate(goals)),
    )
