from .retry import regularize_and_retry
from .riccati import LqSolution, ValuePair, riccati_step, solve_standard, solve_time_consistent
