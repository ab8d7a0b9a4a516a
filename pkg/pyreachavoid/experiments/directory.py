import os
from enum import Enum
from pathlib import Path
from typing import Optional, Union

ENV_VAR = "PYREACHAVOID_OUT_DIR"


class OutputDirectory(Enum):

    DEFAULT = "runs"
    TRAJECTORIES = "trajectories"
    PLOTS = "plots"
    REPORTS = "reports"

    def __str__(self):
        return self.value

    @classmethod
    def root(cls, override: Optional[Union[str, Path]] = None) -> Path:
        """--out-dir, else the environment variable, else ./runs."""
        return Path(override or os.getenv(ENV_VAR) or cls.DEFAULT.value)

    def file(self, name: Union[str, Path]) -> Path:
        """Path of a file in this subdirectory, relative to the output root."""
        return Path(self.value) / name
