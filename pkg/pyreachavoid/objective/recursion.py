"""
Backward reach-avoid recursion

    J_t = max{ g_t(x_t), min{ J_{t+1}, l_t(x_t) } },   J_{T+1} = +inf,

and the critical times at which J_t takes the value of a margin.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.errors import Error
from ..core.trajectory import CriticalEntry, CriticalSet, Trajectory
from ..core.types import MarginKind
from ..margins.margin import MarginFn


@dataclass(frozen=True, eq=False)
class CostToGo:
    """J_t for t in {0..T} along a trajectory; J_{T+1} is +inf."""

    values: np.ndarray

    @property
    def initial(self) -> float:
        return float(self.values[0])

    def at(self, t: int) -> float:
        if t == len(self.values):
            return float("inf")
        return float(self.values[t])


def backward_pass(target_values: np.ndarray, failure_values: np.ndarray
                  ) -> Tuple[np.ndarray, List[Optional[MarginKind]]]:
    """
    Run the recursion on margin sequences.

    Returns J_0..J_T and, per step, the kind of margin assigned at that step
    (None when the previous value is carried). The failure branch is checked
    first, so a tie between both margins records a failure.
    """
    horizon = len(target_values) - 1
    values = np.empty(horizon + 1)
    assigned: List[Optional[MarginKind]] = [None] * (horizon + 1)
    following = np.inf
    for t in range(horizon, -1, -1):
        current = max(failure_values[t], min(following, target_values[t]))
        if current == failure_values[t]:
            assigned[t] = MarginKind.FAILURE
        elif current == target_values[t]:
            assigned[t] = MarginKind.TARGET
        values[t] = current
        following = current
    return values, assigned


def _margin_values(traj: Trajectory, target: MarginFn, failure: MarginFn) -> Tuple[np.ndarray, np.ndarray]:
    return target.values(traj.states, traj.t0), failure.values(traj.states, traj.t0)


def cost_to_go(traj: Trajectory, target: MarginFn, failure: MarginFn) -> CostToGo:
    values, _ = backward_pass(*_margin_values(traj, target, failure))
    return CostToGo(values)


def _entries(traj: Trajectory, target: MarginFn, failure: MarginFn) -> List[CriticalEntry]:
    target_values, failure_values = _margin_values(traj, target, failure)
    values, assigned = backward_pass(target_values, failure_values)
    entries = []
    for t, kind in enumerate(assigned):
        if kind is None:
            continue
        margin = failure if kind is MarginKind.FAILURE else target
        entries.append(CriticalEntry(t, kind, margin, float(values[t])))
    return entries


def critical_set(traj: Trajectory, target: MarginFn, failure: MarginFn) -> CriticalSet:
    """Every step at which the recursion assigns a margin, with its kind and value."""
    return CriticalSet(tuple(_entries(traj, target, failure)))


def pinch_point(traj: Trajectory, target: MarginFn, failure: MarginFn) -> CriticalEntry:
    """The last assignment of the backward pass, i.e. the earliest critical step."""
    entries = _entries(traj, target, failure)
    if not entries:
        raise Error("Reach-avoid recursion assigned no margin; margins are not comparable (NaN?)")
    return entries[0]


def regularized_objective(traj: Trajectory, player: int, target: MarginFn, failure: MarginFn,
                          eta: float) -> float:
    """J_0 plus eta times the player's summed squared controls."""
    return cost_to_go(traj, target, failure).initial + eta * float(np.sum(traj.controls[player] ** 2))
