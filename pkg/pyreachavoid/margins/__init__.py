from .combinators import combine_max, combine_min, negate, time_window
from .margin import INACTIVE_MARGIN, MarginFn, constant, never_failing
from .quadratize import DEFAULT_REGULARIZATION, psd_projection, quadratize
from .shapes import (
    DISTANCE_EPSILON,
    box_interval_failure,
    box_target,
    disk_failure,
    disk_target,
    halfplane_failure,
    pairwise_distance_failure,
)
