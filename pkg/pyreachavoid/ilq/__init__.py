from .options import SolverConfig, SolverOptions
from .client import (
    ILQSolver,
    IterationRecord,
    SolveResult,
    StepResult,
    build_lq_approx,
    critical_data,
    ilq_solve,
    line_search_update,
    merit_value,
    rollout,
    solve_subproblem,
)
