from dataclasses import dataclass
from enum import Enum
from typing import Tuple


class Role(Enum):

    TARGET = "target"
    FAILURE = "failure"
    BOUNDARY = "boundary"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Disk:
    center: Tuple[float, float]
    radius: float
    role: Role
    label: str = ""


@dataclass(frozen=True)
class Box:
    center: Tuple[float, float]
    half_extents: Tuple[float, float]
    role: Role
    label: str = ""

    @property
    def corner(self) -> Tuple[float, float]:
        return self.center[0] - self.half_extents[0], self.center[1] - self.half_extents[1]


@dataclass(frozen=True)
class Segment:
    start: Tuple[float, float]
    stop: Tuple[float, float]
    role: Role = Role.BOUNDARY
    label: str = ""
