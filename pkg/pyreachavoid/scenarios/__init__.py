from .geometry import Box, Disk, Role, Segment
from .scenario import InitialRegion, Scenario, make_rng
from .config import overlay, read_config, write_config
from .synthetic import synthetic_crowd
from .builders import (
    BUILDERS,
    DefensiveDriving,
    OnePlayerReachAvoid,
    ScenarioInterface,
    TIntersection,
    defensive_driving,
    load_scenario,
    one_player_reach_avoid,
    t_intersection,
)
