import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..core.errors import ConfigError

logger = logging.getLogger(__name__)

SECTIONS = ("scenario", "system", "players", "margins", "horizon", "initial_states", "solver_overrides")


def overlay(defaults: Dict[str, Any], config: Dict[str, Any], path: Optional[str] = None,
            prefix: str = "") -> Dict[str, Any]:
    """
    Overlay config on a deep copy of defaults. Nested dicts merge key by key;
    a key missing from a non-empty defaults dict is a ConfigError. Empty
    default dicts accept anything.
    """
    merged = copy.deepcopy(defaults)
    if not isinstance(config, dict):
        raise ConfigError(f"Section '{prefix or 'root'}' must be an object, got {type(config).__name__}", path)
    for key, value in config.items():
        name = f"{prefix}.{key}" if prefix else key
        if defaults and key not in defaults:
            raise ConfigError(f"Unknown key '{name}'", path)
        default = defaults.get(key)
        if isinstance(default, dict) and default and isinstance(value, dict):
            merged[key] = overlay(default, value, path, name)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def read_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a scenario config file; every failure names the path."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("No such config file", str(path))
    try:
        with open(path, "r") as file:
            data = json.load(file)
    except json.JSONDecodeError as err:
        raise ConfigError(f"Invalid JSON: {err}", str(path)) from err
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object", str(path))
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"Unknown sections: {', '.join(unknown)}", str(path))
    if "scenario" not in data:
        raise ConfigError("Missing 'scenario' id", str(path))
    logger.debug(f"Read scenario config {path}")
    return data


def write_config(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as file:
        json.dump(data, file, indent=2, sort_keys=True)
    return path
