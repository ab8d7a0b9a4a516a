from .bicycle import DEFAULT_DT, DEFAULT_WHEELBASE, Bicycle, BicycleState, bicycle_step
from .pedestrian import DEFAULT_SPEED_BOUND, Pedestrian, pedestrian_step
from .subsystem import Subsystem
from .system import ControlAllocation, SystemSpec, joint_step, linearize, simulate
