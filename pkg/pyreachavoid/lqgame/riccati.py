"""
Finite-horizon N-player LQ games: feedback Nash strategies via the coupled
Riccati recursion, and the variant that resets each player's value function
at that player's critical times.

Conventions: player i's stage cost is 1/2 x'Q^i x + q^i'x + 1/2 u^i'R^i u^i
+ r^i'u^i, its value function is 1/2 x'Z^i x + z^i'x, and it plays
u^i = -K^i x - k^i.
"""

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, solve

from ..core.errors import SingularSystemError
from ..core.trajectory import CriticalSet, LqApprox


@dataclass(frozen=True, eq=False)
class ValuePair:
    Z: np.ndarray
    z: np.ndarray


@dataclass(frozen=True, eq=False)
class LqSolution:
    """Gains (T, m_i, n), feedforwards (T, m_i) and value pairs Z (T+1, n, n), z (T+1, n) per player."""

    gains: Tuple[np.ndarray, ...]
    feedforwards: Tuple[np.ndarray, ...]
    Z: Tuple[np.ndarray, ...]
    z: Tuple[np.ndarray, ...]

    def value(self, player: int, t: int) -> ValuePair:
        return ValuePair(self.Z[player][t], self.z[player][t])


def _symmetrize(Z: np.ndarray) -> np.ndarray:
    return 0.5 * (Z + Z.T)


def riccati_step(A: np.ndarray, B: Sequence[np.ndarray], Z_next: Sequence[np.ndarray],
                 z_next: Sequence[np.ndarray], Q: Sequence[np.ndarray], q: Sequence[np.ndarray],
                 R: Sequence[np.ndarray], r: Sequence[np.ndarray], t: int = 0
                 ) -> Tuple[List[np.ndarray], List[np.ndarray], List[np.ndarray], List[np.ndarray]]:
    """
    One backward step of the coupled Riccati recursion.

    Solves the stacked first-order conditions

        (R^i + B^i'Z^i B^i) K^i + B^i'Z^i sum_{j!=i} B^j K^j = B^i'Z^i A
        (R^i + B^i'Z^i B^i) k^i + B^i'Z^i sum_{j!=i} B^j k^j = B^i'z^i + r^i

    and updates each player's value pair under the closed loop.

    Raises
    ------
    SingularSystemError
        If the stacked system is singular at time t.
    """
    num_players = len(B)
    dims = [Bi.shape[1] for Bi in B]
    splits = np.cumsum(dims)[:-1]

    S = np.block([
        [(R[i] if i == j else 0.0) + B[i].T @ Z_next[i] @ B[j] for j in range(num_players)]
        for i in range(num_players)
    ])
    Y_gain = np.concatenate([B[i].T @ Z_next[i] @ A for i in range(num_players)], axis=0)
    Y_feed = np.concatenate([B[i].T @ z_next[i] + r[i] for i in range(num_players)], axis=0)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            solution = solve(S, np.column_stack([Y_gain, Y_feed]))
    except (LinAlgError, LinAlgWarning) as err:
        raise SingularSystemError(f"Stacked Riccati system is singular at t={t}: {err}", t) from err
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError(f"Stacked Riccati system has a non-finite solution at t={t}", t)

    K = np.split(solution[:, :-1], splits, axis=0)
    k = np.split(solution[:, -1], splits)

    F = A - sum(B[j] @ K[j] for j in range(num_players))
    beta = -sum(B[j] @ k[j] for j in range(num_players))

    Z, z = [], []
    for i in range(num_players):
        Z.append(_symmetrize(F.T @ Z_next[i] @ F + Q[i] + K[i].T @ R[i] @ K[i]))
        z.append(F.T @ (z_next[i] + Z_next[i] @ beta) + q[i] + K[i].T @ R[i] @ k[i] - K[i].T @ r[i])
    return K, k, Z, z


def _sweep(lq: LqApprox, terminal: Optional[Tuple[Sequence[np.ndarray], Sequence[np.ndarray]]],
           critical: Optional[Sequence[CriticalSet]]) -> LqSolution:
    T, n = lq.horizon, lq.state_dim
    N = lq.num_players
    gains = [np.zeros((T, m, n)) for m in lq.control_dims]
    feedforwards = [np.zeros((T, m)) for m in lq.control_dims]
    Zs = [np.zeros((T + 1, n, n)) for _ in range(N)]
    zs = [np.zeros((T + 1, n)) for _ in range(N)]

    for i in range(N):
        if terminal is None:
            Zs[i][T], zs[i][T] = lq.Q[i][T], lq.q[i][T]
        else:
            Zs[i][T], zs[i][T] = terminal[0][i], terminal[1][i]

    zero_Q, zero_q = np.zeros((n, n)), np.zeros(n)
    for t in range(T - 1, -1, -1):
        if critical is None:
            stage_Q = [lq.Q[i][t] for i in range(N)]
            stage_q = [lq.q[i][t] for i in range(N)]
        else:
            stage_Q, stage_q = [zero_Q] * N, [zero_q] * N
        K, k, Z, z = riccati_step(
            lq.A[t],
            [B[t] for B in lq.B],
            [Zs[i][t + 1] for i in range(N)],
            [zs[i][t + 1] for i in range(N)],
            stage_Q,
            stage_q,
            [R[t] for R in lq.R],
            [r[t] for r in lq.r],
            t,
        )
        for i in range(N):
            gains[i][t], feedforwards[i][t] = K[i], k[i]
            if critical is not None and t in critical[i]:
                # Later critical times no longer matter to player i.
                Zs[i][t], zs[i][t] = lq.Q[i][t], lq.q[i][t]
            else:
                Zs[i][t], zs[i][t] = Z[i], z[i]

    return LqSolution(tuple(gains), tuple(feedforwards), tuple(Zs), tuple(zs))


def solve_standard(lq: LqApprox,
                   terminal: Optional[Tuple[Sequence[np.ndarray], Sequence[np.ndarray]]] = None) -> LqSolution:
    """
    Feedback Nash equilibrium of the time-additive LQ game.

    Parameters
    ----------
    lq : LqApprox
        Game data; stage state costs Q[i][t], q[i][t] for t < T are added at
        every step.
    terminal : tuple, optional
        Per-player (Q_T, q_T) lists; defaults to the game data at T.
    """
    return _sweep(lq, terminal, None)


def solve_time_consistent(lq: LqApprox, critical: Sequence[CriticalSet]) -> LqSolution:
    """
    Time-consistent LQ solve: gains from the coupled Riccati step at every
    time; each player's value pair is reset to (Q^i_t, q^i_t) at that
    player's critical times and otherwise updated with zero stage state cost.
    The horizon T must be critical for every player.
    """
    for i, crit in enumerate(critical):
        if lq.horizon not in crit:
            raise ValueError(f"Player {i} critical set {crit.times} does not contain the horizon {lq.horizon}")
    return _sweep(lq, None, critical)
