from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class Subsystem(ABC):
    """One physical agent of a joint system, discretized in time."""

    state_dim: int
    input_dim: int
    position_index: Tuple[int, int]
    state_labels: Tuple[str, ...]
    input_labels: Tuple[str, ...]

    @abstractmethod
    def step(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Next state from state x under subsystem input w."""

    @abstractmethod
    def jacobians(self, x: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Discrete-time Jacobians (dx'/dx, dx'/dw) at (x, w)."""
