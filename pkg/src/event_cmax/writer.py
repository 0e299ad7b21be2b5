"""Serialization helpers for event datasets, ground truth, raw grids and result tables."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from .models import CameraIntrinsics, EventSlice, PoseTrajectory
from .reader import RASTER_DTYPES, RASTER_MAGIC

FLOAT_FORMAT: str = "%.9g"
EVENTS_FILENAME: str = "events.txt"
CALIBRATION_FILENAME: str = "calib.txt"
POSES_FILENAME: str = "poses.txt"
GROUND_TRUTH_FILENAME: str = "gt.json"


def _prepare(path: Path, overwrite: bool) -> Path:
    destination: Path = Path(path)
    if destination.exists() and not overwrite:
        raise FileExistsError(f"{destination} already exists. Set overwrite=True to replace it.")
    destination.parent.mkdir(parents=True, exist_ok=True)
    return destination


def write_events(path: Path, events: EventSlice, *, overwrite: bool = True) -> Path:
    """Write `t x y p` lines with p in {0, 1}; timestamps get `time_offset` added back."""
    destination: Path = _prepare(path, overwrite)
    frame: pd.DataFrame = pd.DataFrame(
        {
            "t": events.t + events.time_offset,
            "x": events.x,
            "y": events.y,
            "p": (events.p > 0).astype(np.int64),
        }
    )
    frame.to_csv(destination, sep=" ", header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote {count} events to {path}", count=len(events), path=destination)
    return destination


def write_calibration(path: Path, camera: CameraIntrinsics, *, overwrite: bool = True) -> Path:
    """Write the single `fx fy cx cy k1 k2 p1 p2 k3` line."""
    destination: Path = _prepare(path, overwrite)
    values: list[float] = [camera.fx, camera.fy, camera.cx, camera.cy, *camera.dist]
    destination.write_text(" ".join(f"{value:.9g}" for value in values) + "\n", encoding="utf-8")
    logger.info("Wrote calibration {camera} to {path}", camera=camera.describe(), path=destination)
    return destination


def write_trajectory(path: Path, trajectory: PoseTrajectory, *, overwrite: bool = True) -> Path:
    """Write `t px py pz qx qy qz qw` lines (camera-to-world)."""
    destination: Path = _prepare(path, overwrite)
    table: NDArray[np.float64] = np.column_stack((trajectory.times, trajectory.translations, trajectory.quaternions))
    frame: pd.DataFrame = pd.DataFrame(table)
    frame.to_csv(destination, sep=" ", header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote {trajectory} to {path}", trajectory=trajectory.describe(), path=destination)
    return destination


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: Path, data: Mapping[str, Any], *, overwrite: bool = True) -> Path:
    """Write `data` as indented JSON; numpy values are converted to plain numbers and lists."""
    destination: Path = _prepare(path, overwrite)
    destination.write_text(json.dumps(data, indent=2, default=_json_default) + "\n", encoding="utf-8")
    logger.debug("Wrote JSON document to {path}", path=destination)
    return destination


def write_raster(
    path: Path, values: ArrayLike, *, kind: str, dtype: str = "float64", overwrite: bool = True
) -> Path:
    """
    Write a grid as an ASCII header line followed by raw little-endian values.

    Args:
        path: Destination file.
        values: 2-D array shaped (height, width).
        kind: What the grid holds (`count`, `polarity`, `depth`, ...); read back by `read_raster`.
        dtype: `float64` for IWEs, `float32` for depth maps.
        overwrite: Replace an existing file.
    """
    if dtype not in RASTER_DTYPES:
        raise ValueError(f"Unsupported raster dtype '{dtype}'; use one of {sorted(RASTER_DTYPES)}.")
    if not kind or any(character.isspace() for character in kind):
        raise ValueError(f"Raster kind must be a single non-empty word, got {kind!r}.")
    grid: NDArray[np.float64] = np.asarray(values, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError(f"Rasters must be 2-D, got shape {grid.shape}.")
    destination: Path = _prepare(path, overwrite)
    height, width = grid.shape
    header: bytes = f"{RASTER_MAGIC} {dtype} {width} {height} {kind}\n".encode("ascii")
    destination.write_bytes(header + grid.astype(RASTER_DTYPES[dtype]).tobytes(order="C"))
    logger.info("Wrote {width}x{height} {kind} raster to {path}", width=width, height=height, kind=kind, path=destination)
    return destination


def write_frame(path: Path, frame: pd.DataFrame, *, overwrite: bool = True) -> Path:
    """Write a result table as CSV with 9 significant digits."""
    destination: Path = _prepare(path, overwrite)
    frame.to_csv(destination, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote {rows} rows to {path}", rows=len(frame), path=destination)
    return destination


@dataclass(slots=True)
class DatasetFiles:
    """Paths of one written dataset directory."""

    events: Path
    calibration: Path
    poses: Path | None = None
    ground_truth: Path | None = None

    def to_dict(self) -> dict[str, str | None]:
        return {
            "events": str(self.events),
            "calibration": str(self.calibration),
            "poses": str(self.poses) if self.poses is not None else None,
            "ground_truth": str(self.ground_truth) if self.ground_truth is not None else None,
        }


class DatasetWriter:
    """
    Writes an event dataset directory (`events.txt`, `calib.txt`, `poses.txt`, `gt.json`).

    The slice, camera and trajectory are validated before anything touches the disk, so a
    failed validation leaves the directory untouched.
    """

    def __init__(
        self,
        events: EventSlice,
        camera: CameraIntrinsics,
        *,
        trajectory: PoseTrajectory | None = None,
        ground_truth: Mapping[str, Any] | None = None,
    ) -> None:
        self.events: EventSlice = events
        self.camera: CameraIntrinsics = camera
        self.trajectory: PoseTrajectory | None = trajectory
        self.ground_truth: Mapping[str, Any] | None = ground_truth

    def write(self, directory: Path, *, overwrite: bool = True) -> DatasetFiles:
        """Validate the dataset and write it into `directory` (created when missing)."""
        self.events.assert_valid(prefix="events: ")
        self.camera.assert_valid(prefix="camera: ")
        if self.trajectory is not None:
            self.trajectory.assert_valid(prefix="trajectory: ")
        root: Path = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        files: DatasetFiles = DatasetFiles(
            events=write_events(root / EVENTS_FILENAME, self.events, overwrite=overwrite),
            calibration=write_calibration(root / CALIBRATION_FILENAME, self.camera, overwrite=overwrite),
        )
        if self.trajectory is not None:
            files.poses = write_trajectory(root / POSES_FILENAME, self.trajectory, overwrite=overwrite)
        if self.ground_truth is not None:
            files.ground_truth = write_json(root / GROUND_TRUTH_FILENAME, self.ground_truth, overwrite=overwrite)
        return files


__all__: list[str] = [
    "CALIBRATION_FILENAME",
    "DatasetFiles",
    "DatasetWriter",
    "EVENTS_FILENAME",
    "GROUND_TRUTH_FILENAME",
    "POSES_FILENAME",
    "write_calibration",
    "write_events",
    "write_frame",
    "write_json",
    "write_raster",
    "write_trajectory",
]
