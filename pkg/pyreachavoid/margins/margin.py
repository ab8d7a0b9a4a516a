from typing import Callable, Optional

import numpy as np

from ..core.types import MarginKind

# Value taken by margins that are switched off; keeps max/min well defined
# without infinities leaking into derivatives.
INACTIVE_MARGIN = -1e6

ValueFn = Callable[[np.ndarray, int], float]
VectorFn = Callable[[np.ndarray, int], np.ndarray]


class MarginFn(object):
    """
    Scalar margin over the joint state and time.

    Target margins are nonpositive inside the target set; failure margins
    are positive inside the failure set.

    Parameters
    ----------
    kind : MarginKind
        Whether the margin encodes a target or a failure set.
    name : str
        Human-readable name, used in logs and plots.
    value : callable
        (x, t) -> float.
    gradient : callable
        (x, t) -> (n,) array.
    hessian : callable
        (x, t) -> (n, n) array.
    """

    def __init__(self, kind: MarginKind, name: str, value: ValueFn, gradient: VectorFn,
                 hessian: VectorFn) -> None:
        self.kind = kind
        self.name = name
        self._value = value
        self._gradient = gradient
        self._hessian = hessian

    def __repr__(self) -> str:
        return f"MarginFn({self.kind}, {self.name!r})"

    def __call__(self, x, t: int = 0) -> float:
        return self.value(x, t)

    def value(self, x, t: int = 0) -> float:
        return float(self._value(np.asarray(x, dtype=float), t))

    def gradient(self, x, t: int = 0) -> np.ndarray:
        return np.asarray(self._gradient(np.asarray(x, dtype=float), t), dtype=float)

    def hessian(self, x, t: int = 0) -> np.ndarray:
        return np.asarray(self._hessian(np.asarray(x, dtype=float), t), dtype=float)

    def values(self, states: np.ndarray, t0: int = 0) -> np.ndarray:
        """Margin along a state sequence whose first row is at time t0."""
        return np.array([self.value(x, t0 + k) for k, x in enumerate(states)])


def constant(value: float, kind: MarginKind = MarginKind.FAILURE, name: Optional[str] = None) -> MarginFn:
    return MarginFn(
        kind,
        name or f"constant({value})",
        lambda x, t: value,
        lambda x, t: np.zeros(x.shape[0]),
        lambda x, t: np.zeros((x.shape[0], x.shape[0])),
    )


def never_failing() -> MarginFn:
    """Failure margin of an empty failure set (the reach-only case)."""
    return constant(INACTIVE_MARGIN, MarginKind.FAILURE, "never_failing")
