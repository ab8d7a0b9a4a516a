import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Type, Union

import numpy as np

from ..core.errors import ConfigError, Error, ScenarioError
from ..core.types import MarginKind
from ..dynamics.bicycle import Bicycle
from ..dynamics.pedestrian import Pedestrian
from ..dynamics.system import ControlAllocation, SystemSpec
from ..ilq.options import SolverOptions
from ..margins.combinators import combine_max, combine_min, negate, time_window
from ..margins.margin import MarginFn
from ..margins.shapes import (
    box_interval_failure,
    box_target,
    disk_failure,
    disk_target,
    halfplane_failure,
    pairwise_distance_failure,
)
from .config import overlay, read_config
from .geometry import Box, Disk, Role, Segment
from .scenario import InitialRegion, Scenario

logger = logging.getLogger(__name__)

# Bicycle state offsets of the heading and the front wheel angle.
THETA, PHI = 2, 3


def wrap_angle(angle: float) -> float:
    return float((angle + np.pi) % (2 * np.pi) - np.pi)


# Step rule of games whose players compete.
GAME_STEP_RULE = {"require_descent": False, "trust_region": 2.0}


class ScenarioInterface(ABC):
    """
    Builds a Scenario from layered settings. Subclasses declare DEFAULTS, one
    dict per config section; a config overlays them key by key.
    """

    name: str = ""
    DEFAULTS: Dict[str, Any] = {}

    def __init__(self, config: Optional[Dict[str, Any]] = None, path: Optional[str] = None) -> None:
        config = dict(config or {})
        config.pop("scenario", None)
        self.path = path
        self.params = overlay(self.DEFAULTS, config, path)

    @abstractmethod
    def factory(self) -> Scenario:
        """Factory function returns the scenario"""

    def _solver_overrides(self) -> Dict[str, Any]:
        overrides = self.params["solver_overrides"]
        try:
            SolverOptions(overrides).factory()
        except ConfigError as err:
            raise ConfigError(err.text, self.path) from err
        return overrides

    def _initial_controls(self, system: SystemSpec, horizon: int) -> List[np.ndarray]:
        constants = self.params["players"].get("initial_controls")
        if constants is None:
            return [np.zeros((horizon, m)) for m in system.control_dims]
        if len(constants) != system.num_players:
            raise ConfigError(f"players.initial_controls needs {system.num_players} entries", self.path)
        return [np.tile(np.asarray(u, dtype=float), (horizon, 1)) for u in constants]

    def _region(self, accept: Optional[Callable[[np.ndarray], bool]],
                transform: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> Optional[InitialRegion]:
        region = self.params["initial_states"].get("region")
        if region is None:
            return None
        low, high = np.asarray(region["low"], dtype=float), np.asarray(region["high"], dtype=float)
        return InitialRegion(low, high, accept, transform)

    def _check_state(self, system: SystemSpec) -> np.ndarray:
        state = np.asarray(self.params["initial_states"]["state"], dtype=float)
        if state.shape != (system.state_dim,):
            raise ConfigError(f"initial_states.state needs {system.state_dim} values, got {state.size}", self.path)
        return state

    def _bicycles(self, count: int) -> List[Bicycle]:
        system = self.params["system"]
        return [Bicycle(system["dt"], system["wheelbase"]) for _ in range(count)]


def _not_failing(failures: Sequence[MarginFn]) -> Callable[[np.ndarray], bool]:
    return lambda x: all(g.value(x, 0) <= 0 for g in failures)


class OnePlayerReachAvoid(ScenarioInterface):
    """
    A single car reaching a disk while avoiding disk obstacles. With
    region.relative_heading the sampled heading is an offset from the bearing
    to the target center. Solves stop early unless the config says otherwise.
    """

    name = "one_player"
    DEFAULTS = {
        "system": {"dt": 0.1, "wheelbase": 4.0},
        "players": {"names": ["car"], "initial_controls": None},
        "margins": {
            "target": {"center": [0.0, 0.0], "radius": 1.0},
            "obstacles": [
                {"center": [4.0, 0.0], "radius": 1.5},
                {"center": [-3.0, 3.0], "radius": 1.5},
                {"center": [-2.0, -4.0], "radius": 1.5},
            ],
            "steering_limit": float(np.pi / 6),
        },
        "horizon": 100,
        "initial_states": {
            "state": [8.0, 6.0, float(np.arctan2(-6.0, -8.0)), 0.0, 2.0],
            "region": {
                "low": [-10.0, -10.0, float(-np.pi / 4), 0.0, 2.0],
                "high": [10.0, 10.0, float(np.pi / 4), 0.0, 2.0],
                "relative_heading": True,
            },
            "min_clearance": 1.0,
        },
        "solver_overrides": {},
    }

    def factory(self) -> Scenario:
        params, margins = self.params, self.params["margins"]
        system = SystemSpec(self._bicycles(1), params["system"]["dt"], names=params["players"]["names"])
        target_disk = margins["target"]
        target = disk_target(target_disk["center"], target_disk["radius"], name="target")
        obstacles = [
            disk_failure(o["center"], o["radius"], name=f"obstacle_{k}") for k, o in enumerate(margins["obstacles"])
        ]
        terms = list(obstacles)
        if margins["steering_limit"] is not None:
            limit = margins["steering_limit"]
            terms.append(box_interval_failure(PHI, -limit, limit, name="steering"))
        if not terms:
            raise ConfigError("margins need at least one obstacle or a steering limit", self.path)
        failure = combine_max(terms, name="failure")

        clearance = params["initial_states"]["min_clearance"]

        def accept(x: np.ndarray) -> bool:
            return target.value(x) > clearance and all(g.value(x) < -clearance for g in obstacles)

        center = np.asarray(target_disk["center"], dtype=float)

        def aim(x: np.ndarray) -> np.ndarray:
            x = x.copy()
            bearing = np.arctan2(center[1] - x[1], center[0] - x[0])
            x[THETA] = wrap_angle(bearing + x[THETA])
            return x

        region = params["initial_states"].get("region") or {}

        geometry = [Disk(tuple(target_disk["center"]), target_disk["radius"], Role.TARGET, "target")]
        geometry += [Disk(tuple(o["center"]), o["radius"], Role.FAILURE, f"obstacle_{k}")
                     for k, o in enumerate(margins["obstacles"])]
        horizon = int(params["horizon"])
        return Scenario(
            name=self.name,
            system=system,
            targets=[target],
            failures=[failure],
            horizon=horizon,
            initial_state=self._check_state(system),
            initial_controls=self._initial_controls(system, horizon),
            player_names=tuple(params["players"]["names"]),
            geometry=tuple(geometry),
            initial_region=self._region(accept, aim if region.get("relative_heading") else None),
            solver_overrides={"early_stop": True, **self._solver_overrides()},
        )


class DefensiveDriving(ScenarioInterface):
    """
    Ego car and an oncoming car on a two-lane road. Before t_react the
    oncoming driver tries to collide; from t_react on the ego player drives
    both cars, and the oncoming car's road and steering constraints join the
    ego failure set after t_react.
    """

    name = "defensive_driving"
    DEFAULTS = {
        "system": {"dt": 0.1, "wheelbase": 4.0},
        "players": {"names": ["ego", "oncoming"], "t_react": 10, "initial_controls": None},
        "margins": {
            "road": {"lower": -3.5, "upper": 3.5},
            "clearance": 2.5,
            "steering_limit": float(np.pi / 6),
            "goal": {"center": [37.5, -1.75], "half_extents": [7.5, 1.75]},
        },
        "horizon": 40,
        "initial_states": {
            "state": [0.0, -1.75, 0.0, 0.0, 10.0, 40.0, 1.75, float(np.pi), 0.0, 10.0],
            "region": None,
        },
        "solver_overrides": {},
    }

    def __init__(self, config: Optional[Dict[str, Any]] = None, path: Optional[str] = None,
                 t_react: Optional[int] = None) -> None:
        super().__init__(config, path)
        if t_react is not None:
            self.params["players"]["t_react"] = int(t_react)

    def _road(self, system: SystemSpec, agent: int, tag: str) -> List[MarginFn]:
        road = self.params["margins"]["road"]
        position = system.position_indices(agent)
        return [
            halfplane_failure([0.0, 1.0], road["upper"], position, name=f"{tag}_road_upper"),
            halfplane_failure([0.0, -1.0], -road["lower"], position, name=f"{tag}_road_lower"),
        ]

    def _steering(self, system: SystemSpec, agent: int, tag: str) -> MarginFn:
        limit = self.params["margins"]["steering_limit"]
        return box_interval_failure(system.state_slices[agent].start + PHI, -limit, limit, name=f"{tag}_steering")

    def factory(self) -> Scenario:
        params, margins = self.params, self.params["margins"]
        horizon = int(params["horizon"])
        t_react = int(params["players"]["t_react"])
        if not 0 < t_react < horizon:
            raise ScenarioError(f"t_react must lie in (0, {horizon}), got {t_react}")

        # Joint inputs: (omega_ego, a_ego, omega_oncoming, a_oncoming).
        allocation = ControlAllocation(4, (4, 2), [
            (0, {0: [(0, 0), (1, 1)], 1: [(0, 2), (1, 3)]}),
            (t_react, {0: [(0, 0), (1, 1), (2, 2), (3, 3)]}),
        ])
        system = SystemSpec(self._bicycles(2), params["system"]["dt"], allocation=allocation,
                            names=params["players"]["names"])

        ego, oncoming = system.position_indices(0), system.position_indices(1)
        collision = pairwise_distance_failure(ego, oncoming, margins["clearance"], name="collision")
        ego_road = self._road(system, 0, "ego")
        oncoming_road = self._road(system, 1, "oncoming")
        oncoming_rules = combine_max(oncoming_road + [self._steering(system, 1, "oncoming")], name="oncoming_rules")

        ego_failure = combine_max(
            [collision] + ego_road + [self._steering(system, 0, "ego"), time_window(oncoming_rules, t_react + 1)],
            name="ego_failure",
        )
        goal = margins["goal"]
        ego_target = box_target(goal["center"], goal["half_extents"], ego, name="ego_goal")
        oncoming_target = negate(combine_max([collision] + ego_road), MarginKind.TARGET, name="oncoming_attack")
        oncoming_failure = combine_max(oncoming_road, name="oncoming_road")

        road = margins["road"]
        geometry = (
            Segment((-10.0, road["upper"]), (60.0, road["upper"]), Role.BOUNDARY, "road"),
            Segment((-10.0, road["lower"]), (60.0, road["lower"]), Role.BOUNDARY, "road"),
            Segment((-10.0, 0.5 * (road["upper"] + road["lower"])), (60.0, 0.5 * (road["upper"] + road["lower"])),
                    Role.BOUNDARY, "center_line"),
            Box(tuple(goal["center"]), tuple(goal["half_extents"]), Role.TARGET, "ego_goal"),
        )
        failures = [ego_failure, oncoming_failure]
        return Scenario(
            name=self.name,
            system=system,
            targets=[ego_target, oncoming_target],
            failures=failures,
            horizon=horizon,
            initial_state=self._check_state(system),
            initial_controls=self._initial_controls(system, horizon),
            player_names=tuple(params["players"]["names"]),
            geometry=geometry,
            initial_region=self._region(_not_failing(failures)),
            solver_overrides={**GAME_STEP_RULE, **self._solver_overrides()},
            metadata={"t_react": t_react, "clearance": margins["clearance"]},
        )


class TIntersection(ScenarioInterface):
    """Two cars and a pedestrian crossing a T-intersection."""

    name = "t_intersection"
    DEFAULTS = {
        "system": {"dt": 0.1, "wheelbase": 4.0, "pedestrian_speed_bound": 2.0},
        "players": {
            "names": ["car_1", "car_2", "pedestrian"],
            "initial_controls": [[0.0, 0.0], [0.0, 0.0], [0.0, 1.8]],
        },
        "margins": {
            "main_road": {"lower": -4.0, "upper": 4.0},
            "stem": {"lower": -4.0, "upper": 4.0},
            "car_clearance": 2.5,
            "pedestrian_clearance": 1.5,
            "steering_limit": float(np.pi / 6),
            "goals": [
                {"center": [20.0, -2.0], "half_extents": [10.0, 2.0]},
                {"center": [-15.0, 2.0], "half_extents": [10.0, 2.0]},
                {"center": [8.0, 8.0], "half_extents": [4.0, 4.0]},
            ],
        },
        "horizon": 60,
        "initial_states": {
            "state": [-25.0, -2.0, 0.0, 0.0, 8.0, 2.0, -15.0, float(np.pi / 2), 0.0, 6.0, 8.0, -5.0],
            "region": None,
        },
        "solver_overrides": {},
    }

    def factory(self) -> Scenario:
        params, margins = self.params, self.params["margins"]
        settings = params["system"]
        agents = self._bicycles(2) + [Pedestrian(settings["dt"], settings["pedestrian_speed_bound"])]
        system = SystemSpec(agents, settings["dt"], names=params["players"]["names"])
        positions = [system.position_indices(k) for k in range(3)]

        def collision(i: int, j: int) -> MarginFn:
            clearance = margins["car_clearance"] if max(i, j) < 2 else margins["pedestrian_clearance"]
            return pairwise_distance_failure(positions[i], positions[j], clearance, name=f"collision_{i}{j}")

        main, stem = margins["main_road"], margins["stem"]
        limit = margins["steering_limit"]

        def main_road(agent: int) -> MarginFn:
            return box_interval_failure(positions[agent][1], main["lower"], main["upper"], name=f"main_road_{agent}")

        def steering(agent: int) -> MarginFn:
            return box_interval_failure(system.state_slices[agent].start + PHI, -limit, limit, name=f"steering_{agent}")

        # Car 2 may be in the stem or on the main road.
        stem_lane = combine_max([
            box_interval_failure(positions[1][0], stem["lower"], stem["upper"], name="stem_sides"),
            halfplane_failure([0.0, 1.0], main["upper"], positions[1], name="stem_top"),
        ], name="stem")
        car_2_lane = combine_min([stem_lane, main_road(1)], name="lanes_1")

        failures = [
            combine_max([collision(0, 1), collision(0, 2), main_road(0), steering(0)], name="car_1_failure"),
            combine_max([collision(0, 1), collision(1, 2), car_2_lane, steering(1)], name="car_2_failure"),
            combine_max([collision(0, 2), collision(1, 2)], name="pedestrian_failure"),
        ]
        goals = margins["goals"]
        if len(goals) != 3:
            raise ConfigError(f"margins.goals needs 3 boxes, got {len(goals)}", self.path)
        targets = [
            box_target(goal["center"], goal["half_extents"], positions[k], name=f"goal_{k}")
            for k, goal in enumerate(goals)
        ]

        geometry = [
            Segment((-40.0, main["upper"]), (40.0, main["upper"])),
            Segment((-40.0, main["lower"]), (stem["lower"], main["lower"])),
            Segment((stem["upper"], main["lower"]), (40.0, main["lower"])),
            Segment((stem["lower"], main["lower"]), (stem["lower"], -30.0)),
            Segment((stem["upper"], main["lower"]), (stem["upper"], -30.0)),
        ]
        geometry += [
            Box(tuple(goal["center"]), tuple(goal["half_extents"]), Role.TARGET, f"goal_{k}")
            for k, goal in enumerate(goals)
        ]
        horizon = int(params["horizon"])
        return Scenario(
            name=self.name,
            system=system,
            targets=targets,
            failures=failures,
            horizon=horizon,
            initial_state=self._check_state(system),
            initial_controls=self._initial_controls(system, horizon),
            player_names=tuple(params["players"]["names"]),
            geometry=tuple(geometry),
            initial_region=self._region(_not_failing(failures)),
            solver_overrides={**GAME_STEP_RULE, **self._solver_overrides()},
            metadata={"car_clearance": margins["car_clearance"],
                      "pedestrian_clearance": margins["pedestrian_clearance"]},
        )


BUILDERS: Dict[str, Type[ScenarioInterface]] = {
    builder.name: builder for builder in (OnePlayerReachAvoid, DefensiveDriving, TIntersection)
}


def one_player_reach_avoid(config: Optional[Dict[str, Any]] = None) -> Scenario:
    return OnePlayerReachAvoid(config).factory()


def defensive_driving(t_react: Optional[int] = None, config: Optional[Dict[str, Any]] = None) -> Scenario:
    return DefensiveDriving(config, t_react=t_react).factory()


def t_intersection(config: Optional[Dict[str, Any]] = None) -> Scenario:
    return TIntersection(config).factory()


def load_scenario(source: Union[str, Path], t_react: Optional[int] = None) -> Scenario:
    """
    Build a scenario from a builder id (one_player, defensive_driving,
    t_intersection) or from a config file path.
    """
    source = str(source)
    if source in BUILDERS:
        config: Dict[str, Any] = {}
        path = None
    else:
        config = read_config(source)
        path = source
        if config["scenario"] not in BUILDERS:
            raise ConfigError(f"Unknown scenario id '{config['scenario']}'", path)
    builder = BUILDERS[config.get("scenario", source)]
    try:
        if builder is DefensiveDriving:
            return DefensiveDriving(config, path, t_react=t_react).factory()
        return builder(config, path).factory()
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"Malformed scenario config: {err!r}", path) from err
    except Error as err:
        if path is None:
            raise
        raise ConfigError(err.text, path) from err
