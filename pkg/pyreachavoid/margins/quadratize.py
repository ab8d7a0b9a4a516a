from typing import Tuple

import numpy as np
from scipy.linalg import eigh

from .margin import MarginFn

DEFAULT_REGULARIZATION = 1e-4


def psd_projection(H: np.ndarray, regularization: float = DEFAULT_REGULARIZATION) -> np.ndarray:
    """Clamp negative eigenvalues of the symmetric part of H to zero, then add regularization * I."""
    H = 0.5 * (H + H.T)
    eigenvalues, eigenvectors = eigh(H)
    projected = (eigenvectors * np.maximum(eigenvalues, 0.0)) @ eigenvectors.T
    projected = 0.5 * (projected + projected.T) + regularization * np.eye(H.shape[0])
    return projected


def quadratize(margin: MarginFn, x_bar, t: int = 0,
               regularization: float = DEFAULT_REGULARIZATION) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Convex quadratic model of a margin about x_bar.

    Returns (Q, q, c) such that m(x) ~ 1/2 x'Q x + q'x + c, where Q is the
    PSD-projected Hessian plus regularization and the model's value and
    gradient agree with the margin at x_bar.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    value = margin.value(x_bar, t)
    gradient = margin.gradient(x_bar, t)
    Q = psd_projection(margin.hessian(x_bar, t), regularization)
    q = gradient - Q @ x_bar
    c = value - gradient @ x_bar + 0.5 * x_bar @ Q @ x_bar
    return Q, q, float(c)
