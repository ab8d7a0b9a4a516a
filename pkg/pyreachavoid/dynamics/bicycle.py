from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.errors import DynamicsError
from .subsystem import Subsystem

DEFAULT_WHEELBASE = 4.0
DEFAULT_DT = 0.1


@dataclass(frozen=True)
class BicycleState:
    """Rear-axle position (m), heading (rad), front wheel angle (rad), speed (m/s)."""

    p_x: float
    p_y: float
    theta: float
    phi: float
    v: float

    def to_array(self) -> np.ndarray:
        return np.array([self.p_x, self.p_y, self.theta, self.phi, self.v], dtype=float)

    @classmethod
    def from_array(cls, x) -> "BicycleState":
        p_x, p_y, theta, phi, v = (float(value) for value in x)
        return cls(p_x, p_y, theta, phi, v)


def _rates(x: np.ndarray, w: np.ndarray, wheelbase: float) -> np.ndarray:
    _, _, theta, phi, v = x
    omega, accel = w
    return np.array(
        [v * np.cos(theta), v * np.sin(theta), v * np.tan(phi) / wheelbase, omega, accel]
    )


def bicycle_step(state: BicycleState, omega: float, accel: float, dt: float = DEFAULT_DT,
                 wheelbase: float = DEFAULT_WHEELBASE) -> BicycleState:
    """
    One forward-Euler step of the kinematic bicycle.

    Raises
    ------
    DynamicsError
        If dt or the wheelbase is not positive, or the step is not finite
        (front wheel angle near +-pi/2).
    """
    if dt <= 0 or wheelbase <= 0:
        raise DynamicsError(f"dt and wheelbase must be positive, got dt={dt}, L={wheelbase}")
    x = state.to_array()
    nxt = x + dt * _rates(x, np.array([omega, accel], dtype=float), wheelbase)
    if not np.all(np.isfinite(nxt)):
        raise DynamicsError(f"Non-finite bicycle step from {state} (phi={state.phi})")
    return BicycleState.from_array(nxt)


class Bicycle(Subsystem):
    """Kinematic bicycle: state (p_x, p_y, theta, phi, v), input (omega, a)."""

    state_dim = 5
    input_dim = 2
    position_index: Tuple[int, int] = (0, 1)
    state_labels = ("p_x", "p_y", "theta", "phi", "v")
    input_labels = ("omega", "a")

    def __init__(self, dt: float = DEFAULT_DT, wheelbase: float = DEFAULT_WHEELBASE) -> None:
        if dt <= 0 or wheelbase <= 0:
            raise DynamicsError(f"dt and wheelbase must be positive, got dt={dt}, L={wheelbase}")
        self.dt = dt
        self.wheelbase = wheelbase

    def step(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return x + self.dt * _rates(x, w, self.wheelbase)

    def jacobians(self, x: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        _, _, theta, phi, v = x
        dt, L = self.dt, self.wheelbase
        A = np.eye(5)
        A[0, 2] = -dt * v * np.sin(theta)
        A[0, 4] = dt * np.cos(theta)
        A[1, 2] = dt * v * np.cos(theta)
        A[1, 4] = dt * np.sin(theta)
        A[2, 3] = dt * v / (L * np.cos(phi) ** 2)
        A[2, 4] = dt * np.tan(phi) / L
        B = np.zeros((5, 2))
        B[3, 0] = dt
        B[4, 1] = dt
        return A, B
