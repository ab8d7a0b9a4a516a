from enum import Enum


class MarginKind(Enum):

    TARGET = "target"
    FAILURE = "failure"

    def __str__(self):
        return self.value

    def __repr__(self):
        return self.value


class Subroutine(Enum):

    PINCH_POINT = "pp"
    TIME_CONSISTENT = "tc"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, value: "str | Subroutine") -> "Subroutine":
        if isinstance(value, Subroutine):
            return value
        for member in cls:
            if value.lower() in (member.value, member.name.lower()):
                return member
        raise ValueError(f"Unknown subroutine: {value}")


class SolveStatus(Enum):

    CONVERGED = "converged"
    TARGET_REACHED = "target_reached"
    MAX_ITERATIONS = "max_iterations"
    FAILED = "failed"

    def __str__(self):
        return self.value
