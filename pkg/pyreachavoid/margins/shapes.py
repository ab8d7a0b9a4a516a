"""
Signed-distance margins of planar shapes. Positions are read from the
joint state through an index pair (ix, iy).
"""

from typing import Sequence, Tuple

import numpy as np

from ..core.errors import MarginError
from ..core.types import MarginKind
from .margin import MarginFn

Position = Tuple[int, int]

# Distances below this are treated as the nonsmooth point of the norm.
DISTANCE_EPSILON = 1e-6


def _embed_gradient(n: int, index: Sequence[int], local: np.ndarray) -> np.ndarray:
    grad = np.zeros(n)
    grad[list(index)] = local
    return grad


def _embed_hessian(n: int, index: Sequence[int], local: np.ndarray) -> np.ndarray:
    hess = np.zeros((n, n))
    hess[np.ix_(list(index), list(index))] = local
    return hess


def _distance_parts(p: np.ndarray, center: np.ndarray):
    d = p - center
    norm = float(np.linalg.norm(d))
    if norm < DISTANCE_EPSILON:
        return norm, np.zeros_like(d), np.zeros((d.size, d.size))
    u = d / norm
    return norm, u, (np.eye(d.size) - np.outer(u, u)) / norm


def _disk(center, radius: float, position: Position, sign: float, kind: MarginKind, name: str) -> MarginFn:
    if radius <= 0:
        raise MarginError(f"Disk radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float)
    index = list(position)

    def value(x, t):
        norm, _, _ = _distance_parts(x[index], center)
        return sign * (norm - radius)

    def gradient(x, t):
        _, u, _ = _distance_parts(x[index], center)
        return _embed_gradient(x.shape[0], index, sign * u)

    def hessian(x, t):
        _, _, h = _distance_parts(x[index], center)
        return _embed_hessian(x.shape[0], index, sign * h)

    return MarginFn(kind, name, value, gradient, hessian)


def disk_target(center, radius: float, position: Position = (0, 1), name: str = "disk_target") -> MarginFn:
    """l(x) = ||p(x) - center|| - radius."""
    return _disk(center, radius, position, 1.0, MarginKind.TARGET, name)


def disk_failure(center, radius: float, position: Position = (0, 1), name: str = "disk_failure") -> MarginFn:
    """g(x) = radius - ||p(x) - center||."""
    return _disk(center, radius, position, -1.0, MarginKind.FAILURE, name)


def halfplane_failure(normal, offset: float, position: Position = (0, 1),
                      name: str = "halfplane_failure") -> MarginFn:
    """g(x) = normal . p(x) - offset, positive beyond the boundary."""
    normal = np.asarray(normal, dtype=float)
    if not np.isclose(np.linalg.norm(normal), 1.0):
        raise MarginError(f"Half-plane normal must be a unit vector, got {normal}")
    index = list(position)
    return MarginFn(
        MarginKind.FAILURE,
        name,
        lambda x, t: float(normal @ x[index]) - offset,
        lambda x, t: _embed_gradient(x.shape[0], index, normal),
        lambda x, t: np.zeros((x.shape[0], x.shape[0])),
    )


def pairwise_distance_failure(position_i: Position, position_j: Position, clearance: float,
                              name: str = "collision") -> MarginFn:
    """
    g(x) = clearance - ||p_i(x) - p_j(x)||, positive in collision.

    Positions closer than DISTANCE_EPSILON get zero derivatives.
    """
    if clearance <= 0:
        raise MarginError(f"Clearance must be positive, got {clearance}")
    index_i, index_j = list(position_i), list(position_j)
    index = index_i + index_j

    def value(x, t):
        return clearance - float(np.linalg.norm(x[index_i] - x[index_j]))

    def gradient(x, t):
        _, u, _ = _distance_parts(x[index_i], x[index_j])
        return _embed_gradient(x.shape[0], index, np.concatenate([-u, u]))

    def hessian(x, t):
        _, _, h = _distance_parts(x[index_i], x[index_j])
        return _embed_hessian(x.shape[0], index, -np.block([[h, -h], [-h, h]]))

    return MarginFn(MarginKind.FAILURE, name, value, gradient, hessian)


def box_interval_failure(index: int, lower: float, upper: float, name: str = "interval") -> MarginFn:
    """g(x) = max(lower - x[index], x[index] - upper); ties take the lower branch."""
    if not lower < upper:
        raise MarginError(f"Interval needs lower < upper, got [{lower}, {upper}]")

    def value(x, t):
        return max(lower - x[index], x[index] - upper)

    def gradient(x, t):
        grad = np.zeros(x.shape[0])
        grad[index] = -1.0 if lower - x[index] >= x[index] - upper else 1.0
        return grad

    return MarginFn(
        MarginKind.FAILURE, name, value, gradient, lambda x, t: np.zeros((x.shape[0], x.shape[0]))
    )


def _box_parts(p: np.ndarray, center: np.ndarray, half_extents: np.ndarray):
    offset = p - center
    signs = np.where(offset >= 0.0, 1.0, -1.0)
    excess = np.abs(offset) - half_extents
    if np.max(excess) <= 0.0:
        k = int(np.argmax(excess))
        grad = np.zeros_like(p)
        grad[k] = signs[k]
        return float(excess[k]), grad, np.zeros((p.size, p.size))
    outside = np.maximum(excess, 0.0)
    norm = float(np.linalg.norm(outside))
    u = outside / norm
    if norm < DISTANCE_EPSILON:
        return norm, signs * u, np.zeros((p.size, p.size))
    active = (excess > 0.0).astype(float)
    hess = np.outer(signs, signs) * np.outer(active, active) * (np.eye(p.size) - np.outer(u, u)) / norm
    return norm, signs * u, hess


def box_target(center, half_extents, position: Position = (0, 1), name: str = "box_target") -> MarginFn:
    """Signed distance to an axis-aligned box, negative inside."""
    center = np.asarray(center, dtype=float)
    half_extents = np.asarray(half_extents, dtype=float)
    if np.any(half_extents <= 0):
        raise MarginError(f"Box half extents must be positive, got {half_extents}")
    index = list(position)
    return MarginFn(
        MarginKind.TARGET,
        name,
        lambda x, t: _box_parts(x[index], center, half_extents)[0],
        lambda x, t: _embed_gradient(x.shape[0], index, _box_parts(x[index], center, half_extents)[1]),
        lambda x, t: _embed_hessian(x.shape[0], index, _box_parts(x[index], center, half_extents)[2]),
    )
