from .core import (
    AffineStrategy,
    CriticalSet,
    Error,
    LqApprox,
    MarginKind,
    SolveStatus,
    Subroutine,
    Trajectory,
)
from .ilq import ILQSolver, SolverConfig, SolverOptions, ilq_solve
from .scenarios import (
    Scenario,
    defensive_driving,
    load_scenario,
    one_player_reach_avoid,
    t_intersection,
)
