import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from ..core.errors import ConfigError
from ..core.trajectory import Trajectory

logger = logging.getLogger(__name__)


class TrajectoryClient(object):
    """
    Reads and writes run artifacts under a base directory: trajectories
    (JSON or CSV), iteration logs (JSON lines), probe reports and batch
    tables. Writes go through a temporary file and an atomic replace.
    """

    def __init__(self, base_dir: Union[str, Path] = ".") -> None:
        self.base_dir = Path(base_dir)

    # ----------------- internal helpers -----------------

    def _resolved_path(self, name: Union[str, Path]) -> Path:
        return self.base_dir.joinpath(Path(name)).resolve()

    def _write(self, name: Union[str, Path], writer: Callable[[Any], None]) -> Path:
        resolved = self._resolved_path(name)
        resolved.parent.mkdir(parents=True, exist_ok=True)
        tmp = resolved.with_suffix(resolved.suffix + ".tmp")
        with open(tmp, "w", newline="") as file:
            writer(file)
        os.replace(tmp, resolved)
        logger.debug(f"Wrote {resolved}")
        return resolved

    def _existing(self, name: Union[str, Path]) -> Path:
        resolved = self._resolved_path(name)
        if not resolved.is_file():
            raise ConfigError("No such file", str(resolved))
        return resolved

    # ----------------- trajectories -----------------

    def dump_trajectory(self, traj: Trajectory, name: Union[str, Path]) -> Path:
        """JSON or CSV, chosen by the file suffix."""
        if Path(name).suffix == ".csv":
            return self._write(name, lambda file: self._write_csv(traj, file))
        return self._write(name, lambda file: json.dump(traj.to_dict(), file))

    def load_trajectory(self, name: Union[str, Path]) -> Trajectory:
        resolved = self._existing(name)
        try:
            if resolved.suffix == ".csv":
                return self._read_csv(resolved)
            with open(resolved, "r") as file:
                return Trajectory.from_dict(json.load(file))
        except (KeyError, ValueError, TypeError) as err:
            raise ConfigError(f"Not a trajectory file: {err!r}", str(resolved)) from err

    @staticmethod
    def _write_csv(traj: Trajectory, file) -> None:
        # One row per state; the controls of the last row are empty.
        writer = csv.writer(file)
        control_columns = [
            f"u{i}_{j}" for i, m in enumerate(traj.control_dims) for j in range(m)
        ]
        writer.writerow(["k", "t0", "dt"] + [f"x_{j}" for j in range(traj.state_dim)] + control_columns)
        for k, x in enumerate(traj.states):
            controls = [repr(float(v)) for u in traj.controls for v in u[k]] if k < traj.horizon else []
            writer.writerow([k, traj.t0, repr(traj.dt)] + [repr(float(v)) for v in x] + controls)

    @staticmethod
    def _read_csv(path: Path) -> Trajectory:
        with open(path, "r", newline="") as file:
            rows = list(csv.reader(file))
        header, body = rows[0], rows[1:]
        n = sum(1 for column in header if column.startswith("x_"))
        dims: Dict[int, int] = {}
        for column in header[3 + n:]:
            player = int(column[1:].split("_")[0])
            dims[player] = dims.get(player, 0) + 1
        states = np.array([[float(v) for v in row[3:3 + n]] for row in body])
        offsets = np.cumsum([0] + [dims[i] for i in sorted(dims)])
        flat = np.array([[float(v) for v in row[3 + n:]] for row in body[:-1]]).reshape(len(body) - 1, offsets[-1])
        controls = [flat[:, a:b] for a, b in zip(offsets, offsets[1:])]
        return Trajectory(states, controls, float(body[0][2]), int(body[0][1]))

    # ----------------- logs, reports and tables -----------------

    def dump_log(self, records: Iterable[Dict[str, Any]], name: Union[str, Path]) -> Path:
        """One JSON object per line."""
        return self._write(name, lambda file: file.writelines(json.dumps(r) + "\n" for r in records))

    def load_log(self, name: Union[str, Path]) -> List[Dict[str, Any]]:
        with open(self._existing(name), "r") as file:
            return [json.loads(line) for line in file if line.strip()]

    def dump_json(self, data: Any, name: Union[str, Path]) -> Path:
        return self._write(name, lambda file: json.dump(data, file, indent=2))

    def load_json(self, name: Union[str, Path]) -> Any:
        resolved = self._existing(name)
        try:
            with open(resolved, "r") as file:
                return json.load(file)
        except json.JSONDecodeError as err:
            raise ConfigError(f"Invalid JSON: {err}", str(resolved)) from err

    def dump_table(self, rows: Sequence[Dict[str, Any]], name: Union[str, Path],
                   columns: Optional[Sequence[str]] = None) -> Path:
        columns = list(columns or (rows[0].keys() if rows else []))

        def writer(file) -> None:
            table = csv.DictWriter(file, fieldnames=columns, extrasaction="ignore")
            table.writeheader()
            table.writerows(rows)

        return self._write(name, writer)

    def dump_text(self, text: str, name: Union[str, Path]) -> Path:
        return self._write(name, lambda file: file.write(text))
