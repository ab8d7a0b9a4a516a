from .errors import (
    ConfigError,
    DimensionError,
    DynamicsError,
    Error,
    LineSearchError,
    MarginError,
    ProfileError,
    RolloutError,
    ScenarioError,
    SingularSystemError,
)
from .trajectory import (
    AffineStrategy,
    CriticalEntry,
    CriticalSet,
    LqApprox,
    Trajectory,
    validate_dimensions,
)
from .types import MarginKind, SolveStatus, Subroutine
