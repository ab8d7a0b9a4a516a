import logging
import time

import pytest

from pyreachavoid.core import ProfileError
from pyreachavoid.logger import Logger
from pyreachavoid.performance import Measure
from pyreachavoid.performance.profile import ComplexityProfile
from pyreachavoid.scenarios import one_player_reach_avoid

from .conftest import toy_scenario


def test_measure_records_latest_call():
    @Measure
    def nap(seconds):
        time.sleep(seconds)
        return seconds

    assert nap.elapsed == 0.0
    assert nap(0.01) == 0.01
    assert nap.elapsed >= 0.01


def test_measure_records_failing_call():
    @Measure
    def broken():
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        broken()
    assert broken.elapsed > 0.0


def test_slope_of_power_law():
    assert ComplexityProfile.slope({25: 1.0, 50: 2.0, 100: 4.0}) == pytest.approx(1.0)
    assert ComplexityProfile.slope({1: 1.0, 2: 8.0, 4: 64.0}) == pytest.approx(3.0)


def test_profile_measures_iterations(toy):
    profile = ComplexityProfile(iterations=2)
    profile.measure_horizons(toy, horizons=(10, 20))
    profile.measure_players(counts=(1, 2), horizon=10)
    data = profile.to_dict()
    assert set(data) == {"horizon", "players"}
    assert all(t > 0 for t in data["horizon"]["times"].values())


def test_profile_reports_scenario_without_iterations():
    with pytest.raises(ProfileError) as info:
        ComplexityProfile(iterations=2).measure(toy_scenario(velocity=(float("nan"), 0.0)))
    assert "No iteration completed" in info.value.text


def test_logger_writes_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    logger = Logger("pyreachavoid.test", log_file=log_file, level=logging.DEBUG)
    logger.info("hello")
    logger.debug("details")
    logger.close()
    text = log_file.read_text()
    assert "INFO pyreachavoid.test: hello" in text
    assert "DEBUG" in text
    assert not any(isinstance(h, logging.FileHandler) for h in logger.get_logger().handlers)


@pytest.mark.slow
def test_iteration_time_is_linear_in_horizon():
    profile = ComplexityProfile()
    profile.measure_horizons(one_player_reach_avoid())
    assert profile.get_horizon_slope() <= 1.3


@pytest.mark.slow
def test_iteration_time_is_at_most_cubic_in_players():
    profile = ComplexityProfile()
    profile.measure_players()
    assert profile.get_player_slope() <= 3.5
