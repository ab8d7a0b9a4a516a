from .oracles import (
    brute_force_objective,
    brute_force_values,
    finite_difference_check,
    margin_derivative_errors,
    numerical_jacobian,
    subsystem_jacobian_errors,
)
from .probes import (
    DEFAULT_DELTA_GAMMA,
    DEFAULT_DELTA_X,
    DEFAULT_EPSILON,
    ProbeReport,
    nash_probe,
    sample_ball,
    time_consistency_probe,
)
