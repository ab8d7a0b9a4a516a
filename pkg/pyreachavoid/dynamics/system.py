from bisect import bisect_right
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from ..core.errors import DimensionError
from ..core.trajectory import Trajectory
from .subsystem import Subsystem


# A player's share of the joint input at some time: pairs of
# (player input index, joint subsystem-input index).
Assignment = Sequence[Tuple[int, int]]


class ControlAllocation:
    """
    Piecewise-constant map from per-player controls to the stacked
    subsystem inputs w.

    At time t, w = sum_i P^i_t u^i where each P^i_t is a 0/1 selection
    matrix of shape (W, m_i). Inputs of a player that drive nothing at time
    t have all-zero columns.
    """

    def __init__(self, input_dim: int, control_dims: Sequence[int],
                 phases: Sequence[Tuple[int, Dict[int, Assignment]]]) -> None:
        if not phases or phases[0][0] != 0:
            raise ValueError("The first allocation phase must start at t=0")
        starts = [start for start, _ in phases]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError(f"Allocation phase starts must increase: {starts}")
        self.input_dim = input_dim
        self.control_dims = tuple(control_dims)
        self.starts = starts
        self.phases: List[Tuple[np.ndarray, ...]] = []
        for _, assignments in phases:
            matrices = []
            for player, m in enumerate(self.control_dims):
                P = np.zeros((input_dim, m))
                for player_index, joint_index in assignments.get(player, ()):
                    P[joint_index, player_index] = 1.0
                P.setflags(write=False)
                matrices.append(P)
            self.phases.append(tuple(matrices))

    @classmethod
    def identity(cls, input_dims: Sequence[int]) -> "ControlAllocation":
        """Player i drives subsystem i for the whole horizon."""
        offsets = np.concatenate([[0], np.cumsum(input_dims)]).astype(int)
        assignments = {
            i: [(j, int(offsets[i]) + j) for j in range(m)] for i, m in enumerate(input_dims)
        }
        return cls(int(offsets[-1]), input_dims, [(0, assignments)])

    def at(self, t: int) -> Tuple[np.ndarray, ...]:
        return self.phases[bisect_right(self.starts, t) - 1]


class SystemSpec:
    """
    A joint discrete-time system made of subsystems whose states are
    concatenated in order. Players' controls reach the subsystems through a
    ControlAllocation.
    """

    def __init__(self, subsystems: Sequence[Subsystem], dt: float,
                 control_dims: Optional[Sequence[int]] = None,
                 allocation: Optional[ControlAllocation] = None,
                 names: Optional[Sequence[str]] = None) -> None:
        self.subsystems = tuple(subsystems)
        self.dt = float(dt)
        input_dims = [sub.input_dim for sub in self.subsystems]
        if allocation is None:
            allocation = ControlAllocation.identity(input_dims)
        if control_dims is None:
            control_dims = allocation.control_dims
        if tuple(control_dims) != allocation.control_dims or allocation.input_dim != sum(input_dims):
            raise DimensionError(
                f"Allocation {allocation.control_dims}->{allocation.input_dim} does not match "
                f"controls {tuple(control_dims)} and subsystem inputs {input_dims}"
            )
        self.control_dims = tuple(int(m) for m in control_dims)
        self.allocation = allocation
        self.names = tuple(names) if names is not None else tuple(f"agent_{i}" for i in range(len(self.subsystems)))

        state_offsets = np.concatenate([[0], np.cumsum([sub.state_dim for sub in self.subsystems])]).astype(int)
        input_offsets = np.concatenate([[0], np.cumsum(input_dims)]).astype(int)
        self.state_slices = tuple(slice(int(a), int(b)) for a, b in zip(state_offsets, state_offsets[1:]))
        self.input_slices = tuple(slice(int(a), int(b)) for a, b in zip(input_offsets, input_offsets[1:]))
        self.state_dim = int(state_offsets[-1])
        self.input_dim = int(input_offsets[-1])

    @property
    def num_players(self) -> int:
        return len(self.control_dims)

    def position_indices(self, agent: int) -> Tuple[int, int]:
        """Joint-state indices of an agent's planar position."""
        offset = self.state_slices[agent].start
        ix, iy = self.subsystems[agent].position_index
        return offset + ix, offset + iy

    def state_labels(self) -> List[str]:
        return [
            f"{name}.{label}"
            for name, sub in zip(self.names, self.subsystems)
            for label in sub.state_labels
        ]

    def _check(self, x: np.ndarray, controls: Sequence[np.ndarray]) -> None:
        if x.shape != (self.state_dim,):
            raise DimensionError(f"State has shape {x.shape}, expected ({self.state_dim},)")
        if len(controls) != self.num_players:
            raise DimensionError(f"Got controls for {len(controls)} players, expected {self.num_players}")
        for i, (u, m) in enumerate(zip(controls, self.control_dims)):
            if np.shape(u) != (m,):
                raise DimensionError(f"Player {i} control has shape {np.shape(u)}, expected ({m},)")

    def subsystem_inputs(self, controls: Sequence[np.ndarray], t: int) -> np.ndarray:
        return sum((P @ u for P, u in zip(self.allocation.at(t), controls)), np.zeros(self.input_dim))

    def step(self, x, controls: Sequence[np.ndarray], t: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        controls = [np.asarray(u, dtype=float) for u in controls]
        self._check(x, controls)
        w = self.subsystem_inputs(controls, t)
        return np.concatenate([
            sub.step(x[xs], w[ws])
            for sub, xs, ws in zip(self.subsystems, self.state_slices, self.input_slices)
        ])

    def linearize(self, x, controls: Sequence[np.ndarray], t: int) -> Tuple[np.ndarray, List[np.ndarray]]:
        x = np.asarray(x, dtype=float)
        controls = [np.asarray(u, dtype=float) for u in controls]
        self._check(x, controls)
        w = self.subsystem_inputs(controls, t)
        blocks = [
            sub.jacobians(x[xs], w[ws])
            for sub, xs, ws in zip(self.subsystems, self.state_slices, self.input_slices)
        ]
        A = block_diag(*[a for a, _ in blocks])
        B_joint = block_diag(*[b for _, b in blocks])
        return A, [B_joint @ P for P in self.allocation.at(t)]


def joint_step(spec: SystemSpec, x, u: Sequence[np.ndarray], t: int) -> np.ndarray:
    return spec.step(x, u, t)


def linearize(spec: SystemSpec, x, u: Sequence[np.ndarray], t: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    return spec.linearize(x, u, t)


def simulate(spec: SystemSpec, x0, controls: Sequence[np.ndarray], t0: int = 0) -> Trajectory:
    """Open-loop rollout of per-player control sequences from x0 at time t0."""
    horizon = len(controls[0]) if controls else 0
    states = [np.asarray(x0, dtype=float)]
    for k in range(horizon):
        states.append(spec.step(states[-1], [u[k] for u in controls], t0 + k))
    return Trajectory(np.array(states), [np.asarray(u, dtype=float) for u in controls], spec.dt, t0)
