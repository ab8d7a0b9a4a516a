import numpy as np
import pytest

from pyreachavoid.core import MarginError, MarginKind
from pyreachavoid.margins import (
    DISTANCE_EPSILON,
    INACTIVE_MARGIN,
    box_interval_failure,
    box_target,
    combine_max,
    combine_min,
    constant,
    disk_failure,
    disk_target,
    halfplane_failure,
    negate,
    never_failing,
    pairwise_distance_failure,
    psd_projection,
    quadratize,
    time_window,
)
from pyreachavoid.verification import margin_derivative_errors


def test_disk_signs():
    target = disk_target([0.0, 0.0], 1.0)
    failure = disk_failure([0.0, 0.0], 1.0)
    assert target.kind is MarginKind.TARGET and failure.kind is MarginKind.FAILURE
    assert target([2.0, 0.0]) == pytest.approx(1.0)
    assert target([0.0, 0.5]) == pytest.approx(-0.5)
    assert failure([0.0, 0.5]) == pytest.approx(0.5)


def test_disk_rejects_nonpositive_radius():
    with pytest.raises(MarginError):
        disk_target([0.0, 0.0], 0.0)


def test_halfplane_requires_unit_normal():
    with pytest.raises(MarginError):
        halfplane_failure([1.0, 1.0], 0.0)
    assert halfplane_failure([0.0, 1.0], 3.5)([0.0, 4.0]) == pytest.approx(0.5)


def test_box_target_signed_distance():
    box = box_target([0.0, 0.0], [1.0, 1.0])
    assert box([0.5, 0.0]) == pytest.approx(-0.5)
    assert box([2.0, 0.0]) == pytest.approx(1.0)
    assert box([2.0, 2.0]) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(MarginError):
        box_target([0.0, 0.0], [1.0, 0.0])


def test_pairwise_distance_at_coincident_positions():
    collision = pairwise_distance_failure((0, 1), (2, 3), 2.5)
    x = np.array([1.0, 1.0, 1.0, 1.0])
    assert collision(x) == pytest.approx(2.5)
    assert not np.any(collision.gradient(x))


def test_hessian_stays_bounded_near_disk_center():
    target = disk_target([1.0, -2.0], 0.5)
    x = np.array([1.0 + 1e-12, -2.0])
    assert target(x) == pytest.approx(-0.5)
    assert not np.any(target.gradient(x))
    assert not np.any(target.hessian(x))
    Q, _, _ = quadratize(target, x, 0)
    assert np.all(np.isfinite(Q)) and np.max(np.abs(Q)) < 1.0
    outside = np.array([1.0 + 10 * DISTANCE_EPSILON, -2.0])
    assert np.max(np.abs(target.hessian(outside))) == pytest.approx(0.1 / DISTANCE_EPSILON)


def test_pairwise_hessian_near_coincident_positions():
    collision = pairwise_distance_failure((0, 1), (2, 3), 2.5)
    x = np.array([1.0, 1.0, 1.0, 1.0 + 1e-14])
    assert not np.any(collision.hessian(x))


def test_interval_tie_takes_lower_branch():
    interval = box_interval_failure(0, -1.0, 1.0)
    assert interval([0.0]) == pytest.approx(-1.0)
    assert interval.gradient([0.0])[0] == -1.0
    assert interval.gradient([0.5])[0] == 1.0


def test_combine_tie_uses_first_branch():
    first = halfplane_failure([1.0, 0.0], 0.0)
    second = halfplane_failure([0.0, 1.0], 0.0)
    x = np.array([1.0, 1.0])
    np.testing.assert_allclose(combine_max([first, second]).gradient(x), [1.0, 0.0])
    np.testing.assert_allclose(combine_min([second, first]).gradient(x), [0.0, 1.0])
    assert combine_min([first, second])([1.0, 2.0]) == pytest.approx(1.0)
    with pytest.raises(MarginError):
        combine_max([])


def test_negate_flips_kind():
    failure = disk_failure([0.0, 0.0], 1.0)
    flipped = negate(failure)
    assert flipped.kind is MarginKind.TARGET
    assert flipped([3.0, 0.0]) == pytest.approx(2.0)
    assert negate(failure, MarginKind.FAILURE).kind is MarginKind.FAILURE


def test_time_window():
    windowed = time_window(constant(1.0), 2, 4)
    assert [windowed([0.0], t) for t in range(6)] == [INACTIVE_MARGIN, INACTIVE_MARGIN, 1.0, 1.0,
                                                      INACTIVE_MARGIN, INACTIVE_MARGIN]
    assert time_window(constant(1.0), 2)([0.0], 100) == 1.0


def test_never_failing():
    g = never_failing()
    assert g.kind is MarginKind.FAILURE
    assert g(np.zeros(3)) == INACTIVE_MARGIN


def test_psd_projection():
    H = np.diag([2.0, -3.0])
    np.testing.assert_allclose(psd_projection(H, 0.0), np.diag([2.0, 0.0]), atol=1e-12)
    assert np.min(np.linalg.eigvalsh(psd_projection(H, 1e-4))) >= 1e-4 - 1e-12


def test_quadratize_matches_value_and_gradient():
    margin = disk_failure([1.0, 0.0], 2.0)
    x_bar = np.array([0.5, 0.3])
    Q, q, c = quadratize(margin, x_bar)
    assert np.all(np.linalg.eigvalsh(Q) >= 0.0)
    assert 0.5 * x_bar @ Q @ x_bar + q @ x_bar + c == pytest.approx(margin(x_bar))
    np.testing.assert_allclose(Q @ x_bar + q, margin.gradient(x_bar))


@pytest.mark.parametrize("margin", [
    disk_target([1.0, -1.0], 1.5),
    disk_failure([0.0, 2.0], 1.0),
    box_target([0.0, 0.0], [2.0, 1.0]),
    pairwise_distance_failure((0, 1), (2, 3), 2.5),
    negate(combine_max([disk_failure([0.0, 0.0], 1.0), halfplane_failure([0.0, 1.0], 0.5)])),
], ids=["disk_target", "disk_failure", "box", "pairwise", "negated_max"])
def test_derivatives_match_finite_differences(margin):
    rng = np.random.default_rng(3)
    points = []
    while len(points) < 100:
        x = rng.uniform(-5.0, 5.0, 4)
        # Stay off the kinks of max and of the box boundary.
        if margin.name == "box_target" and np.min(np.abs(np.abs(x[:2]) - [2.0, 1.0])) < 1e-3:
            continue
        points.append(x)
    gradient_error, hessian_error = margin_derivative_errors(margin, points)
    assert gradient_error < 1e-5
    assert hessian_error < 1e-5
