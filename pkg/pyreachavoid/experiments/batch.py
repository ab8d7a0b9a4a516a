import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import psutil

from ..core.errors import Error
from ..core.trajectory import Trajectory
from ..ilq.client import ILQSolver
from ..ilq.options import SolverConfig
from ..margins.margin import MarginFn
from ..scenarios.builders import load_scenario
from ..scenarios.scenario import Scenario

logger = logging.getLogger(__name__)


@dataclass
class BatchRecord:
    index: int
    initial_state: List[float]
    status: str
    iterations: int = 0
    reached: bool = False
    safe_after_target: bool = False
    safe_all_time: bool = False
    costs: List[float] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BatchRecord":
        return cls(**data)


def safety_flags(traj: Trajectory, targets: Sequence[MarginFn], failures: Sequence[MarginFn]) -> Tuple[bool, bool]:
    """
    (safe after target, safe for all time) over every player. Safe after
    target: the target is entered at a step that is not itself a failure and
    no failure occurs from the first such entry on. Safe for all time: no
    failure anywhere on the horizon.
    """
    after, always = True, True
    for target, failure in zip(targets, failures):
        target_values = target.values(traj.states, traj.t0)
        failure_values = failure.values(traj.states, traj.t0)
        always = always and bool(np.all(failure_values <= 0))
        entries = np.flatnonzero((target_values <= 0) & (failure_values <= 0))
        after = after and entries.size > 0 and bool(np.all(failure_values[entries[0]:] <= 0))
    return after, always


@dataclass(frozen=True)
class BatchStatistics:
    n_starts: int
    reached: int
    mean_iterations: float
    max_iterations: int
    safe_after_target: int
    safe_all_time: int
    failures: int

    @classmethod
    def from_records(cls, records: Sequence[BatchRecord]) -> "BatchStatistics":
        ordered = sorted(records, key=lambda record: record.index)
        solved = [record for record in ordered if record.error is None]
        iterations = [record.iterations for record in solved]
        return cls(
            n_starts=len(ordered),
            reached=sum(record.reached for record in solved),
            mean_iterations=float(np.mean(iterations)) if iterations else 0.0,
            max_iterations=max(iterations) if iterations else 0,
            safe_after_target=sum(record.safe_after_target for record in solved),
            safe_all_time=sum(record.safe_all_time for record in solved),
            failures=len(ordered) - len(solved),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_text(self, label: str = "") -> str:
        return (
            f"{label or 'solver':<8} reached {self.reached}/{self.n_starts}  "
            f"iterations mean {self.mean_iterations:.2f} (max {self.max_iterations})  "
            f"safe after target {self.safe_after_target}  safe all time {self.safe_all_time}  "
            f"failures {self.failures}"
        )


def solve_start(scenario: Scenario, config: SolverConfig, index: int, x0: Sequence[float]) -> BatchRecord:
    """Solve from one initial state; errors become part of the record."""
    record = BatchRecord(index=index, initial_state=[float(v) for v in x0], status="failed")
    try:
        result = ILQSolver(scenario.with_initial_state(x0), config).solve()
    except Error as err:
        record.error = err.text
        return record
    record.status = str(result.status)
    record.iterations = result.iterations
    record.costs = [float(c) for c in result.costs]
    if result.failed:
        record.error = result.message
        return record
    record.reached = result.reached
    record.safe_after_target, record.safe_all_time = safety_flags(
        result.trajectory, scenario.targets, scenario.failures
    )
    return record


def _solve_from_source(source: str, t_react: Optional[int], config: SolverConfig, index: int,
                       x0: Sequence[float]) -> BatchRecord:
    return solve_start(load_scenario(source, t_react=t_react), config, index, x0)


def default_workers() -> int:
    return psutil.cpu_count(logical=False) or 1


def run_batch(scenario: Union[str, Scenario], config: SolverConfig, n_starts: int, seed: int = 0,
              workers: Optional[int] = None, t_react: Optional[int] = None) -> List[BatchRecord]:
    """
    Solve from n_starts initial states sampled with the seed. Given a
    scenario id or config path, starts run in worker processes; a Scenario
    object runs in this process. Records come back sorted by start index.
    """
    if n_starts < 1:
        raise ValueError(f"n_starts must be at least 1, got {n_starts}")
    source = scenario if isinstance(scenario, str) else None
    built = load_scenario(source, t_react=t_react) if source is not None else scenario
    starts = built.sample_initial_states(n_starts, seed)
    workers = default_workers() if workers is None else workers
    logger.info(f"Batch {built.name} [{config.subroutine}]: {n_starts} starts, seed {seed}, "
                f"{workers if source is not None else 1} workers")

    if source is None or workers <= 1:
        records = [solve_start(built, config, index, x0) for index, x0 in enumerate(starts)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tasks = [
                pool.submit(_solve_from_source, source, t_react, config, index, x0)
                for index, x0 in enumerate(starts)
            ]
            records = [task.result() for task in tasks]

    for record in records:
        if record.error is not None:
            logger.warning(f"Start {record.index} failed: {record.error}")
    return sorted(records, key=lambda record: record.index)
