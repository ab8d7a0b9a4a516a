"""
Empirical probes of time consistency and of the local Nash property of
converged strategies. Finite samples can only falsify these properties;
the reports are evidence, not certificates.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..core.errors import Error
from ..core.trajectory import AffineStrategy
from ..ilq.client import ILQSolver, rollout
from ..ilq.options import SolverConfig
from ..objective.recursion import cost_to_go, regularized_objective
from ..scenarios.scenario import Scenario, make_rng

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-2
DEFAULT_DELTA_X = 0.1
DEFAULT_DELTA_GAMMA = 1e-3


def sample_ball(rng: np.random.Generator, center: np.ndarray, radius: float) -> np.ndarray:
    """Uniform sample from the Euclidean ball around center."""
    center = np.asarray(center, dtype=float)
    if radius == 0 or center.size == 0:
        return center.copy()
    direction = rng.standard_normal(center.shape)
    direction /= np.linalg.norm(direction)
    return center + radius * rng.uniform() ** (1.0 / center.size) * direction


def _stats(values: List[float]) -> Dict[str, Optional[float]]:
    if not values:
        return {"min": None, "median": None, "max": None}
    return {"min": float(np.min(values)), "median": float(np.median(values)), "max": float(np.max(values))}


@dataclass
class ProbeReport:
    kind: str
    values: List[float] = field(default_factory=list)
    failures: int = 0
    parameters: Dict[str, Any] = field(default_factory=dict)
    details: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def samples(self) -> int:
        return len(self.values) + self.failures

    @property
    def stats(self) -> Dict[str, Optional[float]]:
        return _stats(self.values)

    def frequency_above(self, threshold: float) -> float:
        """Fraction of successful samples whose value exceeds threshold."""
        if not self.values:
            return 0.0
        return float(np.mean(np.asarray(self.values) > threshold))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "samples": self.samples,
            "excess_stats": self.stats,
            "failures": self.failures,
            "parameters": self.parameters,
            "values": list(self.values),
        }


def time_consistency_probe(strategy: AffineStrategy, scenario: Scenario, s: int, delta_x: float = DEFAULT_DELTA_X,
                           n_samples: int = 10, config: Optional[SolverConfig] = None, seed: int = 0,
                           player: int = 0) -> ProbeReport:
    """
    Compare, from states near the strategy's own state at step s, the
    truncated strategy against a re-solve of the truncated problem.

    For each sample x~ in the ball of radius delta_x around x*_s, the excess
    is J_s(rollout of the truncated strategy) - J_s(re-solved strategy) for
    the given player. The re-solve is warm started from the truncated
    strategy. delta_x = 0 probes the on-trajectory state only.
    """
    if not 0 <= s < strategy.horizon:
        raise ValueError(f"s must lie in [0, {strategy.horizon}), got {s}")
    rng = make_rng(seed)
    tail = strategy.tail(s)
    target, failure = scenario.targets[player], scenario.failures[player]
    report = ProbeReport("time_consistency", parameters={
        "s": s, "delta_x": delta_x, "n_samples": n_samples, "seed": seed, "player": player,
    })
    for sample in range(n_samples):
        x_tilde = sample_ball(rng, tail.reference.states[0], delta_x)
        try:
            kept = rollout(x_tilde, tail, 1.0, scenario.system)
            truncated = scenario.truncated(s, x_tilde, initial_controls=tail.reference.controls)
            result = ILQSolver(truncated, config).solve(initial_strategy=tail)
        except Error as err:
            logger.warning(f"Time-consistency sample {sample} failed: {err.text}")
            report.failures += 1
            continue
        if result.failed:
            logger.warning(f"Time-consistency sample {sample}: re-solve failed: {result.message}")
            report.failures += 1
            continue
        kept_value = cost_to_go(kept, target, failure).initial
        resolved_value = cost_to_go(result.trajectory, target, failure).initial
        report.values.append(kept_value - resolved_value)
        report.details.append({"sample": sample, "kept": kept_value, "resolved": resolved_value,
                               "iterations": result.iterations})
    return report


def nash_probe(strategy: AffineStrategy, scenario: Scenario, player: int,
               delta_gamma: float = DEFAULT_DELTA_GAMMA, n_samples: int = 20, seed: int = 0,
               eta: float = 0.0, x0: Optional[np.ndarray] = None) -> ProbeReport:
    """
    Perturb one player's gains and feedforwards within a ball of radius
    delta_gamma and record that player's objective improvement
    J(strategy) - J(perturbed). J is the reach-avoid value J_0 by default;
    a positive eta adds the control regularization the solver minimizes.
    Others keep their strategies.
    """
    rng = make_rng(seed)
    x0 = scenario.initial_state if x0 is None else np.asarray(x0, dtype=float)
    target, failure = scenario.targets[player], scenario.failures[player]

    def objective(candidate: AffineStrategy) -> float:
        return regularized_objective(rollout(x0, candidate, 1.0, scenario.system), player, target, failure, eta)

    baseline = objective(strategy)
    gains, feedforwards = strategy.gains[player], strategy.feedforwards[player]
    flat = np.concatenate([gains.ravel(), feedforwards.ravel()])
    report = ProbeReport("nash", parameters={
        "player": player, "delta_gamma": delta_gamma, "n_samples": n_samples, "seed": seed, "eta": eta,
        "baseline": baseline,
    })
    for sample in range(n_samples):
        perturbed = sample_ball(rng, flat, delta_gamma)
        candidate = strategy.with_player(
            player,
            perturbed[:gains.size].reshape(gains.shape),
            perturbed[gains.size:].reshape(feedforwards.shape),
        )
        try:
            value = objective(candidate)
        except Error as err:
            logger.warning(f"Nash sample {sample} failed: {err.text}")
            report.failures += 1
            continue
        report.values.append(baseline - value)
    return report
