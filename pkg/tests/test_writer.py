"""Tests for writing event datasets and result files."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from event_cmax import (
    CameraIntrinsics,
    DatasetWriter,
    EventSlice,
    PoseTrajectory,
    ValidationError,
    load_calibration,
    load_events,
    load_trajectory,
)
from event_cmax.synth import translation_trajectory
from event_cmax.writer import DatasetFiles, write_frame, write_json, write_raster

from .sample_data import SMALL_CAMERA, flow_events


def test_dataset_round_trip(tmp_path: Path) -> None:
    events: EventSlice = flow_events((-40.0, 0.0))
    trajectory: PoseTrajectory = translation_trajectory([0.1, 0.0, 0.0], 0.1)
    files: DatasetFiles = DatasetWriter(
        events, SMALL_CAMERA, trajectory=trajectory, ground_truth={"v": np.array([-40.0, 0.0])}
    ).write(tmp_path / "dataset")

    loaded: EventSlice = load_events(files.events)
    assert len(loaded) == len(events)
    assert loaded.t == pytest.approx(events.t, abs=1e-9)
    assert loaded.x == pytest.approx(events.x, rel=1e-8)
    assert loaded.p.tolist() == events.p.tolist()
    assert load_calibration(files.calibration) == SMALL_CAMERA
    assert files.poses is not None and files.ground_truth is not None
    assert load_trajectory(files.poses).interpolate(0.05).translation == pytest.approx([0.05, 0.0, 0.0])
    assert json.loads(files.ground_truth.read_text(encoding="utf-8")) == {"v": [-40.0, 0.0]}
    assert files.to_dict()["events"].endswith("events.txt")


def test_dataset_without_poses_writes_two_files(tmp_path: Path) -> None:
    files: DatasetFiles = DatasetWriter(flow_events((-40.0, 0.0)), SMALL_CAMERA).write(tmp_path)
    assert files.poses is None
    assert sorted(path.name for path in tmp_path.iterdir()) == ["calib.txt", "events.txt"]


def test_time_offset_is_written_back(tmp_path: Path) -> None:
    events: EventSlice = EventSlice(t=[0.0, 0.5], x=[1.0, 2.0], y=[1.0, 1.0], p=[1, -1], time_offset=100.0)
    files: DatasetFiles = DatasetWriter(events, SMALL_CAMERA).write(tmp_path)
    lines: list[str] = files.events.read_text(encoding="utf-8").splitlines()
    assert lines == ["100 1 1 1", "100.5 2 1 0"]


def test_invalid_dataset_leaves_the_directory_untouched(tmp_path: Path) -> None:
    broken: CameraIntrinsics = copy.copy(SMALL_CAMERA)
    broken.fx = -1.0
    writer: DatasetWriter = DatasetWriter(flow_events((-40.0, 0.0)), broken)
    target: Path = tmp_path / "never"
    with pytest.raises(ValidationError, match="camera: "):
        writer.write(target)
    assert not target.exists()


def test_existing_files_need_overwrite(tmp_path: Path) -> None:
    path: Path = write_json(tmp_path / "run.json", {"a": 1})
    with pytest.raises(FileExistsError):
        write_json(path, {"a": 2}, overwrite=False)
    assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1}


@pytest.mark.parametrize(
    ("values", "kind", "dtype", "message"),
    [
        (np.zeros((2, 2)), "count", "int16", "Unsupported raster dtype"),
        (np.zeros((2, 2)), "two words", "float64", "single non-empty word"),
        (np.zeros(4), "count", "float64", "must be 2-D"),
    ],
)
def test_raster_arguments_are_checked(tmp_path: Path, values: np.ndarray, kind: str, dtype: str, message: str) -> None:
    with pytest.raises(ValueError, match=message):
        write_raster(tmp_path / "grid.raw", values, kind=kind, dtype=dtype)


def test_raster_header_is_ascii(tmp_path: Path) -> None:
    path: Path = write_raster(tmp_path / "grid.raw", np.ones((2, 3)), kind="polarity")
    payload: bytes = path.read_bytes()
    assert payload.startswith(b"ECMX-RASTER float64 3 2 polarity\n")
    assert len(payload) == len(b"ECMX-RASTER float64 3 2 polarity\n") + 6 * 8


def test_frames_are_written_as_csv(tmp_path: Path) -> None:
    path: Path = write_frame(tmp_path / "table.csv", pd.DataFrame({"vx": [1.0 / 3.0], "f": [2.0]}))
    assert path.read_text(encoding="utf-8").splitlines() == ["vx,f", "0.333333333,2"]
