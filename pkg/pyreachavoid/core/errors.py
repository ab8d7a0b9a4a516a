from typing import Optional, Sequence

import numpy as np


class Error(Exception):
    def __init__(self, text: str):
        super().__init__(text)
        self.text = text


class DimensionError(Error):
    pass


class DynamicsError(Error):
    pass


class MarginError(Error):
    pass


class SingularSystemError(Error):
    def __init__(self, text: str, time_index: int):
        super().__init__(text)
        self.time_index = time_index


class RolloutError(Error):
    def __init__(self, text: str, time_index: int, controls: Optional[Sequence[np.ndarray]] = None):
        super().__init__(text)
        self.time_index = time_index
        self.controls = [] if controls is None else [np.asarray(u).copy() for u in controls]


class LineSearchError(Error):
    pass


class ConfigError(Error):
    def __init__(self, text: str, path: Optional[str] = None):
        super().__init__(text if path is None else f"{path}: {text}")
        self.path = path


class ScenarioError(Error):
    pass


class ProfileError(Error):
    pass
