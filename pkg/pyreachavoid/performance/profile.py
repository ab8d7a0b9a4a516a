import logging
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ..core.errors import ProfileError
from ..ilq.client import ILQSolver
from ..ilq.options import SolverConfig, SolverOptions
from ..scenarios.scenario import Scenario
from ..scenarios.synthetic import synthetic_crowd

logger = logging.getLogger(__name__)

DEFAULT_HORIZONS = (25, 50, 100, 200)
DEFAULT_PLAYER_COUNTS = (1, 2, 4, 8)


class ComplexityProfile(object):
    """
    Mean wall-clock seconds per ILQ iteration over size sweeps, with the
    log-log slope of time against size.
    """

    def __init__(self, config: Optional[SolverConfig] = None, iterations: int = 3) -> None:
        self.config = config or SolverOptions(max_iterations=iterations, tolerance=1e-12).factory()
        self.horizon_times: Dict[int, float] = {}
        self.player_times: Dict[int, float] = {}

    def measure(self, scenario: Scenario) -> float:
        result = ILQSolver(scenario, self.config).solve()
        if not result.log:
            raise ProfileError(f"No iteration completed on {scenario.name}: {result.message}")
        return float(np.mean([record.elapsed for record in result.log]))

    def measure_horizons(self, scenario: Scenario, horizons: Sequence[int] = DEFAULT_HORIZONS) -> Dict[int, float]:
        for horizon in horizons:
            self.horizon_times[horizon] = self.measure(scenario.with_horizon(horizon))
            logger.info(f"T={horizon}: {self.horizon_times[horizon]:.4f} s/iteration")
        return self.horizon_times

    def measure_players(self, counts: Sequence[int] = DEFAULT_PLAYER_COUNTS, horizon: int = 50) -> Dict[int, float]:
        for count in counts:
            self.player_times[count] = self.measure(synthetic_crowd(count, horizon))
            logger.info(f"N={count}: {self.player_times[count]:.4f} s/iteration")
        return self.player_times

    @staticmethod
    def slope(times: Dict[int, float]) -> float:
        sizes = sorted(times)
        return float(np.polyfit(np.log(sizes), np.log([times[size] for size in sizes]), 1)[0])

    def get_horizon_slope(self) -> float:
        return self.slope(self.horizon_times)

    def get_player_slope(self) -> float:
        return self.slope(self.player_times)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if self.horizon_times:
            data["horizon"] = {"times": self.horizon_times, "slope": self.get_horizon_slope()}
        if self.player_times:
            data["players"] = {"times": self.player_times, "slope": self.get_player_slope()}
        return data
