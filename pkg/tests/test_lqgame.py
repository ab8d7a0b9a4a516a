import numpy as np
import pytest

from pyreachavoid.core import LqApprox, SingularSystemError
from pyreachavoid.lqgame import regularize_and_retry, riccati_step, solve_standard, solve_time_consistent

from .conftest import critical_at, random_lq_game


def lqr_gains(A, B, Q, R):
    """Textbook finite-horizon LQR: P_T = Q_T, K_t = (R + B'PB)^-1 B'PA."""
    horizon = A.shape[0]
    P = Q[horizon]
    gains = np.zeros((horizon, B.shape[2], A.shape[1]))
    for t in range(horizon - 1, -1, -1):
        K = np.linalg.solve(R[t] + B[t].T @ P @ B[t], B[t].T @ P @ A[t])
        P = Q[t] + A[t].T @ P @ A[t] - A[t].T @ P @ B[t] @ K
        gains[t] = K
    return gains


def lq_cost(lq, gains, player, x0):
    """Exact cost of a player when everyone plays u^j = -K^j x."""
    x, cost = x0, 0.0
    for t in range(lq.horizon):
        u = [-(K[t] @ x) for K in gains]
        cost += 0.5 * x @ lq.Q[player][t] @ x + 0.5 * u[player] @ lq.R[player][t] @ u[player]
        x = lq.A[t] @ x + sum(B[t] @ ui for B, ui in zip(lq.B, u))
    return cost + 0.5 * x @ lq.Q[player][lq.horizon] @ x


def test_costless_step_has_zero_gains():
    n, m = 3, 2
    K, k, _, _ = riccati_step(np.eye(n), [np.ones((n, m))], [np.zeros((n, n))], [np.zeros(n)],
                              [np.zeros((n, n))], [np.zeros(n)], [np.eye(m)], [np.zeros(m)])
    assert not np.any(K[0]) and not np.any(k[0])


def test_scalar_lqr_step():
    one = np.ones((1, 1))
    K, _, Z, _ = riccati_step(one, [one], [one], [np.zeros(1)], [np.zeros((1, 1))], [np.zeros(1)], [one],
                              [np.zeros(1)])
    assert K[0][0, 0] == pytest.approx(0.5)
    assert Z[0][0, 0] == pytest.approx(0.5)


def test_singular_step_names_time():
    with pytest.raises(SingularSystemError) as info:
        riccati_step(np.eye(2), [np.zeros((2, 1))], [np.eye(2)], [np.zeros(2)], [np.eye(2)], [np.zeros(2)],
                     [np.zeros((1, 1))], [np.zeros(1)], t=7)
    assert info.value.time_index == 7


def test_regularize_and_retry_recovers():
    T, n = 3, 2
    lq = LqApprox(np.broadcast_to(np.eye(n), (T, n, n)), [np.zeros((T, n, 1))], [np.zeros((T + 1, n, n))],
                  [np.zeros((T + 1, n))], [np.zeros((T, 1, 1))], [np.zeros((T, 1))])
    with pytest.raises(SingularSystemError):
        solve_standard(lq)
    solution = regularize_and_retry(solve_standard)(lq)
    assert not np.any(solution.gains[0])
    with pytest.raises(SingularSystemError):
        regularize_and_retry(retries=0)(solve_standard)(lq)


def test_single_player_reduces_to_lqr(rng):
    for _ in range(100):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, n + 1))
        horizon = int(rng.integers(1, 51))
        lq = random_lq_game(rng, n, (m,), horizon)
        expected = lqr_gains(lq.A, lq.B[0], lq.Q[0], lq.R[0])
        gains = solve_standard(lq).gains[0]
        scale = max(1.0, float(np.max(np.abs(expected))))
        assert np.max(np.abs(gains - expected)) / scale < 1e-9


def test_decoupled_players_solve_independent_lqrs(rng):
    horizon = 10
    a = random_lq_game(rng, 2, (1,), horizon)
    b = random_lq_game(rng, 3, (2,), horizon)
    zero = np.zeros

    def embed(top, bottom):
        return np.stack([np.block([[p, zero((p.shape[0], q.shape[1]))], [zero((q.shape[0], p.shape[1])), q]])
                         for p, q in zip(top, bottom)])

    A = embed(a.A, b.A)
    B = [np.concatenate([a.B[0], zero((horizon, 3, 1))], axis=1), np.concatenate([zero((horizon, 2, 2)), b.B[0]], axis=1)]
    Q = [embed(a.Q[0], zero((horizon + 1, 3, 3))), embed(zero((horizon + 1, 2, 2)), b.Q[0])]
    lq = LqApprox(A, B, Q, [zero((horizon + 1, 5))] * 2, [a.R[0], b.R[0]], [zero((horizon, 1)), zero((horizon, 2))])
    gains = solve_standard(lq).gains
    np.testing.assert_allclose(gains[0][:, :, :2], lqr_gains(a.A, a.B[0], a.Q[0], a.R[0]), atol=1e-9)
    np.testing.assert_allclose(gains[1][:, :, 2:], lqr_gains(b.A, b.B[0], b.Q[0], b.R[0]), atol=1e-9)
    assert not np.any(gains[0][:, :, 2:]) and not np.any(gains[1][:, :, :2])


def test_one_step_game_solves_first_order_conditions(rng):
    lq = random_lq_game(rng, 3, (1, 2), 1)
    gains = solve_standard(lq).gains
    A, B, Z = lq.A[0], [B[0] for B in lq.B], [Q[1] for Q in lq.Q]
    for i, j in ((0, 1), (1, 0)):
        lhs = (lq.R[i][0] + B[i].T @ Z[i] @ B[i]) @ gains[i][0] + B[i].T @ Z[i] @ B[j] @ gains[j][0]
        np.testing.assert_allclose(lhs, B[i].T @ Z[i] @ A, atol=1e-10)


def test_nash_gains_are_best_responses(rng):
    for _ in range(50):
        horizon = int(rng.integers(2, 16))
        lq = random_lq_game(rng, 4, (1, 2), horizon)
        gains = solve_standard(lq).gains
        for i, j in ((0, 1), (1, 0)):
            closed = np.stack([lq.A[t] - lq.B[j][t] @ gains[j][t] for t in range(horizon)])
            response = lqr_gains(closed, lq.B[i], lq.Q[i], lq.R[i])
            assert np.max(np.abs(response - gains[i])) < 1e-8


def test_unilateral_perturbations_never_pay(rng):
    for _ in range(50):
        horizon = int(rng.integers(2, 16))
        lq = random_lq_game(rng, 4, (1, 2), horizon)
        gains = solve_standard(lq).gains
        x0 = rng.standard_normal(4)
        for player in range(2):
            baseline = lq_cost(lq, gains, player, x0)
            for _ in range(5):
                delta = rng.standard_normal(gains[player].shape)
                perturbed = list(gains)
                perturbed[player] = gains[player] + 1e-3 * rng.uniform() * delta / np.linalg.norm(delta)
                assert lq_cost(lq, perturbed, player, x0) >= baseline - 1e-9


def test_value_matches_rollout_cost(rng):
    lq = random_lq_game(rng, 3, (1, 1), 8)
    solution = solve_standard(lq)
    x0 = rng.standard_normal(3)
    for player in range(2):
        Z = solution.value(player, 0).Z
        assert lq_cost(lq, solution.gains, player, x0) == pytest.approx(0.5 * x0 @ Z @ x0, rel=1e-9)
        np.testing.assert_allclose(Z, Z.T, atol=1e-12)


def test_value_resets_at_critical_times(rng):
    lq = random_lq_game(rng, 4, (1, 2), 12)
    critical = [critical_at([3, 7, 12]), critical_at([5, 12])]
    solution = solve_time_consistent(lq, critical)
    for i, crit in enumerate(critical):
        for tau in crit.times:
            assert np.array_equal(solution.Z[i][tau], lq.Q[i][tau])
            assert np.array_equal(solution.z[i][tau], lq.q[i][tau])


def test_time_consistent_gains_ignore_non_critical_costs(rng):
    lq = random_lq_game(rng, 3, (1, 1), 10)
    critical = [critical_at([4, 10]), critical_at([10])]
    Q = [Q.copy() for Q in lq.Q]
    Q[0][6] = 100.0 * np.eye(3)
    Q[1][2] = 100.0 * np.eye(3)
    altered = lq.with_state_costs(Q, lq.q)
    first, second = solve_time_consistent(lq, critical), solve_time_consistent(altered, critical)
    for a, b in zip(first.gains, second.gains):
        assert np.array_equal(a, b)


def test_time_consistent_gains_survive_truncation(rng):
    for _ in range(20):
        horizon = int(rng.integers(6, 20))
        lq = random_lq_game(rng, 3, (1, 2), horizon)
        times = [sorted(set(rng.integers(0, horizon, 3).tolist()) | {horizon}) for _ in range(2)]
        full = solve_time_consistent(lq, [critical_at(t) for t in times])
        s = int(rng.integers(1, horizon))
        shifted = [critical_at([tau - s for tau in t if tau >= s]) for t in times]
        tail = solve_time_consistent(lq.truncated(s), shifted)
        for i in range(2):
            assert np.array_equal(full.gains[i][s:], tail.gains[i])
            assert np.array_equal(full.feedforwards[i][s:], tail.feedforwards[i])


def test_time_consistent_with_terminal_only_matches_standard(rng):
    lq = random_lq_game(rng, 3, (1, 2), 8)
    horizon = lq.horizon
    Q = [np.concatenate([np.zeros((horizon, 3, 3)), Q[horizon:]]) for Q in lq.Q]
    q = [np.zeros((horizon + 1, 3)) for _ in lq.q]
    terminal_only = lq.with_state_costs(Q, q)
    tc = solve_time_consistent(lq, [critical_at([horizon])] * 2)
    standard = solve_standard(terminal_only)
    for a, b in zip(tc.gains, standard.gains):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_segments_match_standard_solves(rng):
    lq = random_lq_game(rng, 3, (2,), 12)
    tau = 5
    solution = solve_time_consistent(lq, [critical_at([tau, 12])])
    zero_Q = [np.zeros_like(lq.Q[0])]
    zero_q = [np.zeros_like(lq.q[0])]
    stage_free = lq.with_state_costs(zero_Q, zero_q)
    late = solve_standard(stage_free.truncated(tau), terminal=([lq.Q[0][12]], [lq.q[0][12]]))
    early = solve_standard(stage_free.truncated(0, tau), terminal=([lq.Q[0][tau]], [lq.q[0][tau]]))
    np.testing.assert_allclose(solution.gains[0][tau:], late.gains[0], atol=1e-12)
    np.testing.assert_allclose(solution.gains[0][:tau], early.gains[0], atol=1e-12)


def test_time_consistent_requires_horizon(rng):
    lq = random_lq_game(rng, 2, (1,), 5)
    with pytest.raises(ValueError):
        solve_time_consistent(lq, [critical_at([2])])
