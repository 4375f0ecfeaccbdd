import json
import os

import numpy as np
import pytest

from solnoise.runio import (
    RunManifest,
    canonical_json,
    config_hash,
    read_binary,
    read_manifest,
    write_binary,
    write_csv,
)


def test_csv_format_and_determinism(tmp_path):
    path = str(tmp_path / "data.csv")
    cols = {"nu": np.array([-0.5, 0.0, 0.5]), "v": np.array([1.0, -2.5e-9, 3.0])}
    write_csv(path, cols, {"seed": 7, "zeta": 1.5})
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "# seed=7"
    assert lines[1] == "# zeta=1.5"
    assert lines[2] == "nu,v"
    assert len(lines) == 6
    # full-precision round trip
    parsed = float(lines[4].split(",")[1])
    assert parsed == -2.5e-9

    path2 = str(tmp_path / "data2.csv")
    write_csv(path2, cols, {"zeta": 1.5, "seed": 7})  # different dict order
    with open(path) as a, open(path2) as b:
        assert a.read() == b.read()


def test_csv_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_csv(str(tmp_path / "x.csv"), {"a": [1, 2], "b": [1]}, {})


def test_binary_round_trip_real(tmp_path):
    path = str(tmp_path / "arr.f64")
    arr = np.arange(12, dtype=float).reshape(3, 4)
    write_binary(path, arr, {"axes": ["xi", "nu"]})
    back = read_binary(path)
    assert np.array_equal(back, arr)
    with open(path + ".json") as fh:
        desc = json.load(fh)
    assert desc["shape"] == [3, 4]
    assert desc["axes"] == ["xi", "nu"]
    assert desc["byte_order"] == "little-endian"


def test_binary_round_trip_complex(tmp_path):
    path = str(tmp_path / "arr.c128")
    arr = np.array([[1 + 2j, 3 - 4j]], dtype=complex)
    write_binary(path, arr, {})
    back = read_binary(path)
    assert np.array_equal(back, arr)
    raw = np.fromfile(path, dtype="<f8")
    assert raw.tolist() == [1.0, 2.0, 3.0, -4.0]


def test_manifest_round_trip(tmp_path):
    m = RunManifest(
        config_hash="abc", master_seed=42, grid={"n_points": 64},
        wall_clock_s=1.5, diverged_trajectories=0, extra={"note": "x"},
    )
    m.write(str(tmp_path))
    back = read_manifest(str(tmp_path))
    assert back["master_seed"] == 42
    assert back["config_hash"] == "abc"
    assert "exp(-i*omega*tau)" in back["transform"]
    assert back["software_version"]


def test_config_hash_stable():
    a = config_hash({"b": 1, "a": [1, 2]})
    b = config_hash({"a": [1, 2], "b": 1})
    assert a == b
    assert a != config_hash({"a": [1, 2], "b": 2})
    assert canonical_json({"y": 1, "x": 2}) == '{"x":2,"y":1}'
