import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from ..core.errors import DynamicsError, Error, LineSearchError, RolloutError
from ..core.trajectory import AffineStrategy, CriticalSet, LqApprox, Trajectory
from ..core.types import Subroutine, SolveStatus
from ..dynamics.system import SystemSpec
from ..lqgame.retry import regularize_and_retry
from ..lqgame.riccati import LqSolution, solve_standard, solve_time_consistent
from ..margins.margin import MarginFn
from ..margins.quadratize import quadratize
from ..objective.recursion import cost_to_go, critical_set, pinch_point, regularized_objective
from ..performance.measure import Measure
from ..scenarios.scenario import Scenario
from .options import SolverConfig, SolverOptions

logger = logging.getLogger(__name__)


def rollout(x0, strategy: AffineStrategy, alpha: float, system: SystemSpec) -> Trajectory:
    """
    Simulate the affine strategies from x0.

    Raises
    ------
    RolloutError
        If a control or the next state is non-finite; carries the time index
        and the controls applied at that step.
    """
    reference = strategy.reference
    x = np.asarray(x0, dtype=float)
    states = [x]
    controls: List[List[np.ndarray]] = [[] for _ in range(strategy.num_players)]
    for k in range(strategy.horizon):
        t = reference.time(k)
        u = strategy.controls(k, x, alpha)
        if not all(np.all(np.isfinite(ui)) for ui in u):
            raise RolloutError(f"Non-finite control at t={t}", t, u)
        try:
            x = system.step(x, u, t)
        except DynamicsError as err:
            raise RolloutError(f"Rollout diverged at t={t}: {err.text}", t, u) from err
        if not np.all(np.isfinite(x)):
            raise RolloutError(f"Non-finite state at t={t + 1}", t, u)
        states.append(x)
        for i, ui in enumerate(u):
            controls[i].append(ui)
    controls_arrays = [
        np.array(c) if c else np.zeros((0, m)) for c, m in zip(controls, reference.control_dims)
    ]
    return Trajectory(np.array(states), controls_arrays, reference.dt, reference.t0)


def critical_data(traj: Trajectory, targets: Sequence[MarginFn], failures: Sequence[MarginFn],
                  subroutine: Subroutine) -> List[CriticalSet]:
    """Per-player critical sets: the single pinch point, or every critical time."""
    if subroutine is Subroutine.PINCH_POINT:
        return [CriticalSet((pinch_point(traj, l, g),)) for l, g in zip(targets, failures)]
    return [critical_set(traj, l, g) for l, g in zip(targets, failures)]


def build_lq_approx(traj: Trajectory, system: SystemSpec, critical: Sequence[CriticalSet], eta: float,
                    regularization: float = 1e-4) -> LqApprox:
    """
    Linearize the dynamics along traj and quadratize each player's margins
    at its critical times, in deviation coordinates about traj.

    Q^i, q^i are zero away from the critical times. The control cost
    eta ||u||^2 expands about ubar to R = 2 eta I and r = 2 eta ubar.
    """
    T, n = traj.horizon, traj.state_dim
    A = np.zeros((T, n, n))
    B = [np.zeros((T, n, m)) for m in traj.control_dims]
    for k in range(T):
        A[k], B_k = system.linearize(traj.states[k], traj.controls_at(k), traj.time(k))
        for i, Bi in enumerate(B_k):
            B[i][k] = Bi

    Q = [np.zeros((T + 1, n, n)) for _ in critical]
    q = [np.zeros((T + 1, n)) for _ in critical]
    for i, crit in enumerate(critical):
        for entry in crit:
            x_bar = traj.states[entry.tau]
            Q[i][entry.tau], _, _ = quadratize(entry.margin, x_bar, traj.time(entry.tau), regularization)
            q[i][entry.tau] = entry.margin.gradient(x_bar, traj.time(entry.tau))

    R = [np.broadcast_to(2.0 * eta * np.eye(m), (T, m, m)) for m in traj.control_dims]
    r = [2.0 * eta * u for u in traj.controls]
    return LqApprox(A, B, Q, q, R, r)


def solve_subproblem(lq: LqApprox, critical: Sequence[CriticalSet], subroutine: Subroutine) -> LqSolution:
    if subroutine is Subroutine.PINCH_POINT:
        return solve_standard(lq)
    return solve_time_consistent(lq, critical)


def merit_value(traj: Trajectory, targets: Sequence[MarginFn], failures: Sequence[MarginFn], eta: float) -> float:
    """
    Sum over players of the regularized reach-avoid objective. Logged every
    iteration; the line search checks it only under require_descent.
    """
    return sum(
        regularized_objective(traj, i, l, g, eta) for i, (l, g) in enumerate(zip(targets, failures))
    )


class StepResult(NamedTuple):
    strategy: AffineStrategy
    trajectory: Trajectory
    alpha: float
    merit: float


def line_search_update(x0, current: AffineStrategy, candidate: LqSolution, system: SystemSpec,
                       merit: Callable[[Trajectory], float], config: SolverConfig) -> StepResult:
    """
    Backtrack over alpha0, alpha0 * shrink, ... and accept the first finite
    rollout that stays within the trust region about the current trajectory.
    With require_descent its merit must also not exceed the current one plus
    the slack. When no step passes, the smallest alpha with a finite rollout
    is taken.

    The current strategy's reference is both the expansion point of the
    candidate and the baseline of the step.

    Raises
    ------
    LineSearchError
        If every rollout is non-finite.
    """
    reference = current.reference
    trial = AffineStrategy(candidate.gains, candidate.feedforwards, reference)
    current_merit = merit(reference)
    alpha = config.initial_alpha
    fallback: Optional[StepResult] = None
    accepted: Optional[StepResult] = None
    for _ in range(config.max_backtracks + 1):
        try:
            traj = rollout(x0, trial, alpha, system)
        except RolloutError as err:
            logger.debug(f"alpha={alpha:.3g}: {err.text}")
        else:
            value = merit(traj)
            if np.isfinite(value):
                fallback = StepResult(trial, traj, alpha, value)
                within = traj.max_deviation(reference) <= config.trust_region
                descent = not config.require_descent or value <= current_merit + config.merit_slack
                if within and descent:
                    accepted = fallback
                    break
        alpha *= config.alpha_shrink

    if accepted is None:
        if fallback is None:
            raise LineSearchError(f"All {config.max_backtracks + 1} line-search rollouts are non-finite")
        logger.warning(f"Line search exhausted; taking alpha={fallback.alpha:.3g} "
                       f"(merit {current_merit:.6g} -> {fallback.merit:.6g})")
        accepted = fallback

    T = accepted.trajectory.horizon
    strategy = AffineStrategy(
        gains=candidate.gains,
        feedforwards=[np.zeros((T, m)) for m in accepted.trajectory.control_dims],
        reference=accepted.trajectory,
    )
    return StepResult(strategy, accepted.trajectory, accepted.alpha, accepted.merit)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    costs: List[float]
    merit: float
    alpha: float
    max_deviation: float
    critical_times: List[List[int]]
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iter": self.iteration,
            "J0": list(self.costs),
            "merit": self.merit,
            "alpha": self.alpha,
            "max_deviation": self.max_deviation,
            "critical_times": [list(times) for times in self.critical_times],
        }


@dataclass(frozen=True, eq=False)
class SolveResult:
    strategy: AffineStrategy
    trajectory: Trajectory
    log: List[IterationRecord]
    status: SolveStatus
    costs: List[float]
    message: str = ""

    @property
    def iterations(self) -> int:
        return len(self.log)

    @property
    def reached(self) -> bool:
        """Every player's J_0 <= 0 on the final trajectory."""
        return all(c <= 0 for c in self.costs)

    @property
    def failed(self) -> bool:
        return self.status is SolveStatus.FAILED


class ILQSolver(object):

    def __init__(self, scenario: Scenario, config: Optional[SolverConfig] = None, throw: bool = False) -> None:
        """
        Iterative LQ solver for a reach-avoid game.

        Parameters
        ----------
        scenario : Scenario
            The game to solve.
        config : SolverConfig, optional
            Solver settings; by default the defaults overlaid with the
            scenario's solver overrides.
        throw : bool, optional
            If True, failures are raised, otherwise they are logged and the
            solve returns a FAILED status, by default False.

        Attributes
        ----------
        scenario : Scenario
        config : SolverConfig
        throw : bool
        """
        self.scenario = scenario
        self.config = config if config is not None else SolverOptions(scenario.solver_overrides).factory()
        self.throw = throw
        self._solve_lq = regularize_and_retry(
            retries=self.config.max_retries, increment=self.config.retry_increment
        )(solve_subproblem)

    def check_throw(self, error: Error) -> None:
        logger.critical(f"Error: {error.text}")
        if self.throw:
            raise error

    def costs(self, traj: Trajectory) -> List[float]:
        return [
            cost_to_go(traj, l, g).initial for l, g in zip(self.scenario.targets, self.scenario.failures)
        ]

    def merit(self, traj: Trajectory) -> float:
        return merit_value(traj, self.scenario.targets, self.scenario.failures, self.config.eta)

    @Measure
    def _iterate(self, strategy: AffineStrategy, traj: Trajectory):
        critical = critical_data(traj, self.scenario.targets, self.scenario.failures, self.config.subroutine)
        lq = build_lq_approx(traj, self.scenario.system, critical, self.config.eta, self.config.regularization)
        solution = self._solve_lq(lq, critical, self.config.subroutine)
        step = line_search_update(self.scenario.initial_state, strategy, solution, self.scenario.system,
                                  self.merit, self.config)
        return critical, step

    def _result(self, strategy, traj, log, status, message="") -> SolveResult:
        result = SolveResult(strategy, traj, log, status, self.costs(traj), message)
        logger.info(f"{self.scenario.name} [{self.config.subroutine}]: {status} after {result.iterations} "
                    f"iterations, J0={[round(c, 4) for c in result.costs]}")
        return result

    def solve(self, initial_strategy: Optional[AffineStrategy] = None) -> SolveResult:
        """
        Run the outer ILQ loop until consecutive trajectories differ by less
        than the tolerance, the iteration cap is hit or, with early stopping,
        every player has reached its target.

        Parameters
        ----------
        initial_strategy : AffineStrategy, optional
            Warm start; by default the scenario's open-loop initial controls.
            Its gains are kept and it is re-anchored on its own rollout from
            the scenario's initial state.

        Returns
        -------
        SolveResult
            Final strategy and trajectory, the iteration log and the status.
            Non-convergence is a status, not an exception.
        """
        config = self.config
        log: List[IterationRecord] = []
        strategy = initial_strategy if initial_strategy is not None else self.scenario.initial_strategy()
        try:
            traj = rollout(self.scenario.initial_state, strategy, 0.0, self.scenario.system)
        except Error as err:
            self.check_throw(err)
            return SolveResult(strategy, strategy.reference, log, SolveStatus.FAILED,
                               [float("inf")] * self.scenario.num_players, err.text)
        strategy = AffineStrategy(strategy.gains, [np.zeros_like(k) for k in strategy.feedforwards], traj)

        for iteration in range(1, config.max_iterations + 1):
            if config.early_stop and all(c <= 0 for c in self.costs(traj)):
                return self._result(strategy, traj, log, SolveStatus.TARGET_REACHED)
            try:
                critical, step = self._iterate(strategy, traj)
            except Error as err:
                self.check_throw(err)
                return self._result(strategy, traj, log, SolveStatus.FAILED, err.text)
            except ValueError as err:
                self.check_throw(Error(f"{err}"))
                return self._result(strategy, traj, log, SolveStatus.FAILED, f"{err}")

            deviation = step.trajectory.max_deviation(traj)
            strategy, traj = step.strategy, step.trajectory
            record = IterationRecord(
                iteration=iteration,
                costs=self.costs(traj),
                merit=step.merit,
                alpha=step.alpha,
                max_deviation=deviation,
                critical_times=[crit.times for crit in critical],
                elapsed=self._iterate.elapsed,
            )
            log.append(record)
            logger.debug(f"iter {iteration}: merit={step.merit:.6g} alpha={step.alpha:.3g} "
                         f"deviation={deviation:.3g}")
            if deviation < config.tolerance:
                return self._result(strategy, traj, log, SolveStatus.CONVERGED)

        if config.early_stop and all(c <= 0 for c in self.costs(traj)):
            return self._result(strategy, traj, log, SolveStatus.TARGET_REACHED)
        return self._result(strategy, traj, log, SolveStatus.MAX_ITERATIONS)


def ilq_solve(scenario: Scenario, config: Optional[SolverConfig] = None,
              initial_strategy: Optional[AffineStrategy] = None, throw: bool = False) -> SolveResult:
    return ILQSolver(scenario, config, throw).solve(initial_strategy)
