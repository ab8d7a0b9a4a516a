"""
Independent checks: a direct evaluation of the reach-avoid objective that
shares nothing with the backward recursion, and centered finite differences
for analytic derivatives.
"""

import logging
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np

from ..core.trajectory import Trajectory
from ..dynamics.subsystem import Subsystem
from ..margins.margin import MarginFn

logger = logging.getLogger(__name__)


def brute_force_values(target_values: Sequence[float], failure_values: Sequence[float], s: int = 0) -> float:
    """
    J_s = min over t in [s, T] of max{ l_t, max over tau in [s, t] of g_tau },
    evaluated by a double loop.
    """
    horizon = len(target_values) - 1
    if not 0 <= s <= horizon:
        raise ValueError(f"s must lie in [0, {horizon}], got {s}")
    best = np.inf
    for t in range(s, horizon + 1):
        worst = target_values[t]
        for tau in range(s, t + 1):
            worst = max(worst, failure_values[tau])
        best = min(best, worst)
    return float(best)


def brute_force_objective(traj: Trajectory, target: MarginFn, failure: MarginFn, s: int = 0) -> float:
    target_values = [target.value(x, traj.time(k)) for k, x in enumerate(traj.states)]
    failure_values = [failure.value(x, traj.time(k)) for k, x in enumerate(traj.states)]
    return brute_force_values(target_values, failure_values, s)


def numerical_jacobian(fn: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-5) -> np.ndarray:
    """Centered differences; shape fn(x).shape + (n,)."""
    if h <= 0:
        raise ValueError(f"Step size must be positive, got {h}")
    x0 = np.asarray(x, dtype=float)
    columns = []
    for j in range(x0.size):
        step = np.zeros_like(x0)
        step[j] = h
        fplus = np.asarray(fn(x0 + step), dtype=float)
        fminus = np.asarray(fn(x0 - step), dtype=float)
        columns.append((fplus - fminus) / (2 * h))
    return np.stack(columns, axis=-1)


def finite_difference_check(fn: Callable[[np.ndarray], np.ndarray], derivative: Callable[[np.ndarray], np.ndarray],
                            points: Iterable[np.ndarray], h: float = 1e-5) -> float:
    """
    Max over points of |analytic - numerical| / max(1, |analytic|),
    elementwise.
    """
    worst = 0.0
    for x in points:
        analytic = np.asarray(derivative(x), dtype=float)
        numerical = numerical_jacobian(fn, x, h).reshape(analytic.shape)
        error = np.abs(analytic - numerical) / np.maximum(1.0, np.abs(analytic))
        worst = max(worst, float(np.max(error)) if error.size else 0.0)
    return worst


def margin_derivative_errors(margin: MarginFn, points: Sequence[np.ndarray], t: int = 0,
                             h: float = 1e-5) -> Tuple[float, float]:
    """Gradient and Hessian errors of a margin."""
    gradient_error = finite_difference_check(lambda x: margin.value(x, t), lambda x: margin.gradient(x, t), points, h)
    hessian_error = finite_difference_check(lambda x: margin.gradient(x, t), lambda x: margin.hessian(x, t), points, h)
    return gradient_error, hessian_error


def subsystem_jacobian_errors(subsystem: Subsystem, points: Sequence[Tuple[np.ndarray, np.ndarray]],
                              h: float = 1e-5) -> Tuple[float, float]:
    """State and input Jacobian errors of a subsystem step at (x, w) points."""
    state_error = max(
        finite_difference_check(lambda y: subsystem.step(y, w), lambda y: subsystem.jacobians(y, w)[0], [x], h)
        for x, w in points
    )
    input_error = max(
        finite_difference_check(lambda v: subsystem.step(x, v), lambda v: subsystem.jacobians(x, v)[1], [w], h)
        for x, w in points
    )
    return state_error, input_error
