import dataclasses
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ScenarioError
from ..core.trajectory import AffineStrategy, Trajectory
from ..dynamics.system import SystemSpec, simulate
from ..margins.margin import MarginFn


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class InitialRegion:
    """
    Box of joint initial states sampled uniformly, with rejection.

    Dimensions with low == high stay fixed. `transform` maps a uniform draw
    onto the state it stands for, e.g. a heading offset onto a heading.
    `accept` rejects samples, e.g. those starting inside an obstacle or
    already in the target.
    """

    low: np.ndarray
    high: np.ndarray
    accept: Optional[Callable[[np.ndarray], bool]] = None
    transform: Optional[Callable[[np.ndarray], np.ndarray]] = None
    max_attempts: int = 10000

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        low, high = np.asarray(self.low, dtype=float), np.asarray(self.high, dtype=float)
        for _ in range(self.max_attempts):
            x = rng.uniform(low, high)
            if self.transform is not None:
                x = self.transform(x)
            if self.accept is None or self.accept(x):
                return x
        raise ScenarioError(f"No admissible initial state after {self.max_attempts} samples")


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    A reach-avoid game: joint system, per-player target and failure margins,
    horizon, initial state and the controls the solver starts from.

    Attributes
    ----------
    name : str
        Scenario identifier.
    system : SystemSpec
        Joint dynamics with the control allocation.
    targets, failures : tuple of MarginFn
        Player i's target margin l^i and failure margin g^i.
    horizon : int
        Number of steps T.
    initial_state : np.ndarray
        Joint state at time t0.
    initial_controls : tuple of np.ndarray
        Per-player (T, m_i) controls of the initial open-loop strategy.
    player_names : tuple of str
    geometry : tuple
        Disks, boxes and segments drawn by the plots.
    initial_region : InitialRegion, optional
        Where batch runs sample initial states.
    solver_overrides : dict
        Solver settings this scenario prefers over the defaults.
    metadata : dict
        Free-form scenario parameters, e.g. the reaction time.
    t0 : int
        Absolute time of the first step.
    """

    name: str
    system: SystemSpec
    targets: Tuple[MarginFn, ...]
    failures: Tuple[MarginFn, ...]
    horizon: int
    initial_state: np.ndarray
    initial_controls: Tuple[np.ndarray, ...] = ()
    player_names: Tuple[str, ...] = ()
    geometry: Tuple[Any, ...] = ()
    initial_region: Optional[InitialRegion] = None
    solver_overrides: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    t0: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "failures", tuple(self.failures))
        object.__setattr__(self, "initial_state", np.array(self.initial_state, dtype=float))
        if not self.initial_controls:
            object.__setattr__(self, "initial_controls",
                               tuple(np.zeros((self.horizon, m)) for m in self.system.control_dims))
        else:
            object.__setattr__(self, "initial_controls",
                               tuple(np.array(u, dtype=float) for u in self.initial_controls))
        if not self.player_names:
            object.__setattr__(self, "player_names", tuple(f"player_{i}" for i in range(self.num_players)))
        self._check()

    def _check(self) -> None:
        N = self.system.num_players
        if self.horizon < 1:
            raise ScenarioError(f"Horizon must be at least 1, got {self.horizon}")
        if len(self.targets) != N or len(self.failures) != N:
            raise ScenarioError(f"Expected {N} target and failure margins, got {len(self.targets)} and {len(self.failures)}")
        if self.initial_state.shape != (self.system.state_dim,):
            raise ScenarioError(f"Initial state has shape {self.initial_state.shape}, expected ({self.system.state_dim},)")
        for i, (u, m) in enumerate(zip(self.initial_controls, self.system.control_dims)):
            if u.shape != (self.horizon, m):
                raise ScenarioError(f"Initial controls of player {i} have shape {u.shape}, expected ({self.horizon}, {m})")

    @property
    def num_players(self) -> int:
        return self.system.num_players

    @property
    def dt(self) -> float:
        return self.system.dt

    def initial_trajectory(self) -> Trajectory:
        return simulate(self.system, self.initial_state, self.initial_controls, self.t0)

    def initial_strategy(self) -> AffineStrategy:
        return AffineStrategy.open_loop(self.initial_trajectory())

    def with_initial_state(self, x0: Sequence[float]) -> "Scenario":
        return dataclasses.replace(self, initial_state=np.array(x0, dtype=float))

    def with_horizon(self, horizon: int) -> "Scenario":
        controls = []
        for u in self.initial_controls:
            if horizon <= len(u):
                controls.append(u[:horizon])
            else:
                pad = np.repeat(u[-1:], horizon - len(u), axis=0) if len(u) else np.zeros((horizon, u.shape[1]))
                controls.append(np.concatenate([u, pad]))
        return dataclasses.replace(self, horizon=horizon, initial_controls=tuple(controls))

    def truncated(self, s: int, x_s: Sequence[float],
                  initial_controls: Optional[Sequence[np.ndarray]] = None) -> "Scenario":
        """The sub-game over local steps [s, T] starting from x_s at absolute time t0 + s."""
        if not 0 <= s < self.horizon:
            raise ScenarioError(f"Truncation step {s} outside [0, {self.horizon})")
        controls = [u[s:] for u in self.initial_controls] if initial_controls is None else initial_controls
        return dataclasses.replace(
            self,
            horizon=self.horizon - s,
            initial_state=np.array(x_s, dtype=float),
            initial_controls=tuple(controls),
            t0=self.t0 + s,
        )

    def sample_initial_states(self, count: int, seed: int) -> np.ndarray:
        if self.initial_region is None:
            raise ScenarioError(f"Scenario {self.name} has no initial region to sample from")
        rng = make_rng(seed)
        return np.array([self.initial_region.sample(rng) for _ in range(count)])
