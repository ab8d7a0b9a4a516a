from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .types import MarginKind


def _frozen(array: Any, ndim: int) -> np.ndarray:
    out = np.array(array, dtype=float)
    if out.size == 0 and out.ndim < ndim:
        out = out.reshape((0,) * ndim)
    out.setflags(write=False)
    return out


class SystemLike(Protocol):
    state_dim: int
    control_dims: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Joint states and per-player controls of a game over a horizon.

    Attributes
    ----------
    states : np.ndarray
        Shape (T+1, n). Row k is the joint state at absolute time t0 + k.
    controls : tuple of np.ndarray
        One array per player, shape (T, m_i).
    dt : float
        Seconds per step.
    t0 : int
        Absolute time index of the first state. Nonzero for sub-horizon
        problems starting at an intermediate time.
    """

    states: np.ndarray
    controls: Tuple[np.ndarray, ...]
    dt: float
    t0: int = 0

    def __post_init__(self):
        object.__setattr__(self, "states", _frozen(self.states, 2))
        object.__setattr__(self, "controls", tuple(_frozen(u, 2) for u in self.controls))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", int(self.t0))

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def num_players(self) -> int:
        return len(self.controls)

    @property
    def control_dims(self) -> Tuple[int, ...]:
        return tuple(u.shape[1] for u in self.controls)

    def time(self, k: int) -> int:
        """Absolute time index of local step k."""
        return self.t0 + k

    def controls_at(self, k: int) -> List[np.ndarray]:
        return [u[k] for u in self.controls]

    def tail(self, s: int) -> "Trajectory":
        """The part of the trajectory from local step s onwards."""
        return Trajectory(self.states[s:], [u[s:] for u in self.controls], self.dt, self.t0 + s)

    def max_deviation(self, other: "Trajectory") -> float:
        return float(np.max(np.abs(self.states - other.states)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.states)) and all(np.all(np.isfinite(u)) for u in self.controls))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "dt": self.dt,
            "states": self.states.tolist(),
            "controls": {f"player_{i}": u.tolist() for i, u in enumerate(self.controls)},
        }
        if self.t0:
            data["t0"] = self.t0
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Trajectory":
        controls = data["controls"]
        ordered = sorted(controls, key=lambda key: int(key.rsplit("_", 1)[-1]))
        return cls(
            states=data["states"],
            controls=[controls[key] for key in ordered],
            dt=data["dt"],
            t0=data.get("t0", 0),
        )


def validate_dimensions(traj: Trajectory, system: SystemLike) -> bool:
    """True iff the trajectory's state and control shapes match the system."""
    if traj.states.ndim != 2 or traj.states.shape[1] != system.state_dim:
        return False
    if len(traj.controls) != len(system.control_dims):
        return False
    for u, m in zip(traj.controls, system.control_dims):
        if u.ndim != 2 or u.shape[0] != traj.horizon:
            return False
        if u.shape[0] and u.shape[1] != m:
            return False
    return True


@dataclass(frozen=True, eq=False)
class AffineStrategy:
    """
    Per-player affine feedback strategies about a reference trajectory.

    Player i applies u^i_k = ubar^i_k - K^i_k (x_k - xbar_k) - alpha k^i_k.
    """

    gains: Tuple[np.ndarray, ...]
    feedforwards: Tuple[np.ndarray, ...]
    reference: Trajectory

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(_frozen(K, 3) for K in self.gains))
        object.__setattr__(self, "feedforwards", tuple(_frozen(k, 2) for k in self.feedforwards))

    @classmethod
    def open_loop(cls, reference: Trajectory) -> "AffineStrategy":
        T, n = reference.horizon, reference.state_dim
        return cls(
            gains=[np.zeros((T, m, n)) for m in reference.control_dims],
            feedforwards=[np.zeros((T, m)) for m in reference.control_dims],
            reference=reference,
        )

    @property
    def horizon(self) -> int:
        return self.reference.horizon

    @property
    def num_players(self) -> int:
        return len(self.gains)

    def control(self, player: int, k: int, x: np.ndarray, alpha: float = 1.0) -> np.ndarray:
        dx = x - self.reference.states[k]
        return (
            self.reference.controls[player][k]
            - self.gains[player][k] @ dx
            - alpha * self.feedforwards[player][k]
        )

    def controls(self, k: int, x: np.ndarray, alpha: float = 1.0) -> List[np.ndarray]:
        return [self.control(i, k, x, alpha) for i in range(self.num_players)]

    def tail(self, s: int) -> "AffineStrategy":
        return AffineStrategy(
            gains=[K[s:] for K in self.gains],
            feedforwards=[k[s:] for k in self.feedforwards],
            reference=self.reference.tail(s),
        )

    def with_player(self, player: int, gains: np.ndarray, feedforwards: np.ndarray) -> "AffineStrategy":
        new_gains = list(self.gains)
        new_feedforwards = list(self.feedforwards)
        new_gains[player] = gains
        new_feedforwards[player] = feedforwards
        return AffineStrategy(new_gains, new_feedforwards, self.reference)


@dataclass(frozen=True, eq=False)
class LqApprox:
    """
    Linearized dynamics and quadratized costs of an LQ game in deviation
    coordinates about a reference trajectory.

    Stage cost of player i at step t is 1/2 x'Q x + q'x + 1/2 u'R u + r'u,
    with x, u deviations from the reference.

    Shapes: A (T, n, n); B[i] (T, n, m_i); Q[i] (T+1, n, n); q[i] (T+1, n);
    R[i] (T, m_i, m_i); r[i] (T, m_i).
    """

    A: np.ndarray
    B: Tuple[np.ndarray, ...]
    Q: Tuple[np.ndarray, ...]
    q: Tuple[np.ndarray, ...]
    R: Tuple[np.ndarray, ...]
    r: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen(self.A, 3))
        for name, ndim in (("B", 3), ("Q", 3), ("q", 2), ("R", 3), ("r", 2)):
            object.__setattr__(self, name, tuple(_frozen(a, ndim) for a in getattr(self, name)))

    @property
    def horizon(self) -> int:
        return self.A.shape[0]

    @property
    def state_dim(self) -> int:
        return self.A.shape[1]

    @property
    def num_players(self) -> int:
        return len(self.B)

    @property
    def control_dims(self) -> Tuple[int, ...]:
        return tuple(B.shape[2] for B in self.B)

    def truncated(self, start: int, stop: Optional[int] = None) -> "LqApprox":
        """Sub-game over steps [start, stop], stop defaulting to the horizon."""
        stop = self.horizon if stop is None else stop
        return LqApprox(
            A=self.A[start:stop],
            B=[B[start:stop] for B in self.B],
            Q=[Q[start:stop + 1] for Q in self.Q],
            q=[q[start:stop + 1] for q in self.q],
            R=[R[start:stop] for R in self.R],
            r=[r[start:stop] for r in self.r],
        )

    def with_control_regularization(self, epsilon: float) -> "LqApprox":
        return LqApprox(
            A=self.A,
            B=self.B,
            Q=self.Q,
            q=self.q,
            R=[R + epsilon * np.eye(R.shape[-1]) for R in self.R],
            r=self.r,
        )

    def with_state_costs(self, Q: Sequence[np.ndarray], q: Sequence[np.ndarray]) -> "LqApprox":
        return LqApprox(A=self.A, B=self.B, Q=Q, q=q, R=self.R, r=self.r)


@dataclass(frozen=True)
class CriticalEntry:
    tau: int
    kind: MarginKind
    margin: Any
    value: float


@dataclass(frozen=True)
class CriticalSet:
    """One player's critical times in increasing order."""

    entries: Tuple[CriticalEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ordered = tuple(sorted(self.entries, key=lambda entry: entry.tau))
        taus = [entry.tau for entry in ordered]
        if len(set(taus)) != len(taus):
            raise ValueError(f"Critical times must be distinct: {taus}")
        object.__setattr__(self, "entries", ordered)

    def __iter__(self) -> Iterator[CriticalEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, tau: object) -> bool:
        return any(entry.tau == tau for entry in self.entries)

    @property
    def times(self) -> List[int]:
        return [entry.tau for entry in self.entries]

    def next_critical(self, t: int) -> Optional[CriticalEntry]:
        """First entry with tau >= t."""
        for entry in self.entries:
            if entry.tau >= t:
                return entry
        return None
