from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional

from ..core.errors import ConfigError
from ..core.types import Subroutine


@dataclass(frozen=True)
class SolverConfig:
    """
    Settings of the iterative LQ reach-avoid solver.

    Attributes
    ----------
    subroutine : Subroutine
        LQ subroutine: pinch point or time consistent.
    eta : float
        Weight of the control regularization eta * sum ||u||^2.
    max_iterations : int
        Iteration cap of the outer loop.
    tolerance : float
        Convergence threshold on max_t ||x_t - x_t^prev||_inf.
    initial_alpha, alpha_shrink, max_backtracks
        Line-search schedule alpha0, alpha0 * shrink, ...
    trust_region : float
        Largest accepted step, as max_t ||x_t - x_t^prev||_inf; inf disables it.
    require_descent : bool
        Also require the merit not to increase. Games whose players compete
        turn it off and bound the step with the trust region instead.
    regularization : float
        Added to the PSD-projected margin Hessians.
    merit_slack : float
        Allowed increase of the merit under require_descent.
    early_stop : bool
        Stop as soon as every player's J_0 <= 0.
    max_retries, retry_increment
        Regularize-and-retry schedule for singular LQ solves.
    """

    subroutine: Subroutine = Subroutine.TIME_CONSISTENT
    eta: float = 1e-2
    max_iterations: int = 200
    tolerance: float = 1e-3
    initial_alpha: float = 1.0
    alpha_shrink: float = 0.5
    max_backtracks: int = 16
    trust_region: float = float("inf")
    require_descent: bool = True
    regularization: float = 1e-4
    merit_slack: float = 1e-9
    early_stop: bool = False
    max_retries: int = 3
    retry_increment: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "subroutine", Subroutine.parse(self.subroutine))
        if self.eta <= 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.tolerance <= 0 or self.merit_slack < 0 or self.regularization < 0:
            raise ConfigError("tolerance must be positive; merit_slack and regularization nonnegative")
        if not self.trust_region > 0:
            raise ConfigError(f"trust_region must be positive, got {self.trust_region}")
        if not 0 < self.initial_alpha <= 1:
            raise ConfigError(f"initial_alpha must lie in (0, 1], got {self.initial_alpha}")
        if not 0 < self.alpha_shrink < 1:
            raise ConfigError(f"alpha_shrink must lie in (0, 1), got {self.alpha_shrink}")
        if self.max_iterations < 1 or self.max_backtracks < 0 or self.max_retries < 0:
            raise ConfigError("max_iterations must be >= 1; max_backtracks and max_retries >= 0")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["subroutine"] = str(self.subroutine)
        return data


class SolverOptions(object):
    """
    Builds a SolverConfig from layered settings: defaults, then scenario
    overrides, then explicit keyword arguments.
    """

    def __init__(self, overrides: Optional[Dict[str, Any]] = None, **arguments: Any) -> None:
        self.overrides = dict(overrides or {})
        self.arguments = {key: value for key, value in arguments.items() if value is not None}

    def factory(self) -> SolverConfig:
        known = {f.name for f in fields(SolverConfig)}
        merged = {**self.overrides, **self.arguments}
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigError(f"Unknown solver settings: {', '.join(unknown)}")
        try:
            return SolverConfig(**merged)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"Invalid solver settings: {err}") from err
