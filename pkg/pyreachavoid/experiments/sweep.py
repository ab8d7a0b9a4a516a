import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..core.errors import Error
from ..core.trajectory import Trajectory
from ..ilq.client import ILQSolver
from ..ilq.options import SolverConfig
from ..scenarios.builders import load_scenario
from ..scenarios.scenario import Scenario
from .batch import default_workers

logger = logging.getLogger(__name__)


def min_separation(scenario: Scenario, traj: Trajectory, first: int = 0, second: int = 1) -> float:
    """Smallest planar distance between two agents over the trajectory."""
    a, b = (list(scenario.system.position_indices(agent)) for agent in (first, second))
    return float(np.min(np.linalg.norm(traj.states[:, a] - traj.states[:, b], axis=1)))


@dataclass
class ReactionRecord:
    t_react: int
    status: str
    min_distance: float = float("nan")
    collided: bool = False
    costs: List[float] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def solve_reaction(source: str, t_react: int, config: SolverConfig) -> ReactionRecord:
    """Solve the defensive driving game for one reaction step."""
    record = ReactionRecord(t_react=t_react, status="failed")
    try:
        scenario = load_scenario(source, t_react=t_react)
        result = ILQSolver(scenario, config).solve()
    except Error as err:
        record.error = err.text
        return record
    record.status = str(result.status)
    record.costs = [float(c) for c in result.costs]
    if result.failed:
        record.error = result.message
        return record
    record.min_distance = min_separation(scenario, result.trajectory)
    record.collided = record.min_distance <= scenario.metadata["clearance"]
    return record


def reaction_sweep(source: str, t_reacts: Sequence[int], config: SolverConfig,
                   workers: Optional[int] = None) -> List[ReactionRecord]:
    """
    Solve one scenario for each reaction step and report whether the ego car
    keeps its clearance. Records come back sorted by reaction step.
    """
    if not t_reacts:
        raise ValueError("reaction_sweep needs at least one reaction step")
    workers = default_workers() if workers is None else workers
    logger.info(f"Reaction sweep on {source} [{config.subroutine}]: t_react in {list(t_reacts)}")
    if workers <= 1:
        records = [solve_reaction(source, t_react, config) for t_react in t_reacts]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tasks = [pool.submit(solve_reaction, source, t_react, config) for t_react in t_reacts]
            records = [task.result() for task in tasks]
    for record in records:
        if record.error is not None:
            logger.warning(f"t_react={record.t_react} failed: {record.error}")
        else:
            logger.info(f"t_react={record.t_react}: min distance {record.min_distance:.3f} ({record.status})")
    return sorted(records, key=lambda record: record.t_react)
