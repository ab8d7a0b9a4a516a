from typing import Tuple

import numpy as np

from .subsystem import Subsystem

DEFAULT_SPEED_BOUND = 2.0


def pedestrian_step(state, u, dt: float, speed_bound: float = np.inf) -> np.ndarray:
    """Single integrator with each velocity component clamped to +-speed_bound."""
    clamped = np.clip(np.asarray(u, dtype=float), -speed_bound, speed_bound)
    return np.asarray(state, dtype=float) + dt * clamped


class Pedestrian(Subsystem):
    """Planar point with bounded velocity control: state (p_x, p_y), input (v_x, v_y)."""

    state_dim = 2
    input_dim = 2
    position_index: Tuple[int, int] = (0, 1)
    state_labels = ("p_x", "p_y")
    input_labels = ("v_x", "v_y")

    def __init__(self, dt: float = 0.1, speed_bound: float = DEFAULT_SPEED_BOUND) -> None:
        if dt <= 0 or speed_bound <= 0:
            raise ValueError(f"dt and speed bound must be positive, got {dt}, {speed_bound}")
        self.dt = dt
        self.speed_bound = speed_bound

    def step(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return pedestrian_step(x, w, self.dt, self.speed_bound)

    def jacobians(self, x: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # Saturated components do not respond to their input.
        active = (np.abs(w) < self.speed_bound).astype(float)
        return np.eye(2), self.dt * np.diag(active)
