from .recursion import (
    CostToGo,
    backward_pass,
    cost_to_go,
    critical_set,
    pinch_point,
    regularized_objective,
)
