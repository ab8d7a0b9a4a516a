import numpy as np
import pytest

from pyreachavoid.core import ConfigError, Trajectory
from pyreachavoid.storage import TrajectoryClient


@pytest.fixture
def client(tmp_path):
    return TrajectoryClient(tmp_path)


@pytest.fixture
def trajectory(rng):
    return Trajectory(rng.normal(size=(6, 3)), [rng.normal(size=(5, 2)), rng.normal(size=(5, 1))], 0.1, t0=4)


@pytest.mark.parametrize("name", ["trajectories/solution.json", "trajectories/solution.csv"])
def test_trajectory_files_are_exact(client, trajectory, name):
    path = client.dump_trajectory(trajectory, name)
    assert path.is_file()
    assert not path.with_suffix(path.suffix + ".tmp").exists()
    loaded = client.load_trajectory(name)
    assert loaded.t0 == 4 and loaded.dt == 0.1
    assert np.array_equal(loaded.states, trajectory.states)
    for a, b in zip(loaded.controls, trajectory.controls):
        assert np.array_equal(a, b)


def test_csv_columns(client, trajectory, tmp_path):
    client.dump_trajectory(trajectory, "solution.csv")
    header = (tmp_path / "solution.csv").read_text().splitlines()[0]
    assert header == "k,t0,dt,x_0,x_1,x_2,u0_0,u0_1,u1_0"


def test_missing_and_malformed_files(client, tmp_path):
    with pytest.raises(ConfigError) as info:
        client.load_trajectory("nowhere.json")
    assert "nowhere.json" in info.value.text
    (tmp_path / "bad.json").write_text('{"states": []}')
    with pytest.raises(ConfigError):
        client.load_trajectory("bad.json")


def test_iteration_log(client):
    records = [{"iter": 1, "J0": [0.5]}, {"iter": 2, "J0": [-0.1]}]
    client.dump_log(records, "logs/run.jsonl")
    assert client.load_log("logs/run.jsonl") == records


def test_table_and_text(client, tmp_path):
    client.dump_table([{"solver": "pp", "reached": 3}, {"solver": "tc", "reached": 4}], "stats.csv")
    assert (tmp_path / "stats.csv").read_text().splitlines() == ["solver,reached", "pp,3", "tc,4"]
    client.dump_text("done\n", "stats.txt")
    assert (tmp_path / "stats.txt").read_text() == "done\n"
    client.dump_json({"a": [1, 2]}, "report.json")
    assert client.load_json("report.json") == {"a": [1, 2]}
