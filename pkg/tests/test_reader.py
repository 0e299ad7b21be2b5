"""Tests for parsing event datasets and slicing streams."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import pytest

from event_cmax import (
    CameraIntrinsics,
    EventFormatError,
    EventSlice,
    PoseTrajectory,
    RasterFormatError,
    RefTimePolicy,
    SliceBy,
    load_calibration,
    load_events,
    load_trajectory,
    read_events,
    slice_events,
)
from event_cmax.reader import Raster, read_raster
from event_cmax.writer import write_raster

from .sample_data import CALIBRATION_TEXT, EVENTS_TEXT, POSES_TEXT, SMALL_CAMERA


def test_reads_events_and_maps_zero_polarity_to_negative() -> None:
    events, skipped = read_events(io.StringIO(EVENTS_TEXT))
    assert skipped == 0
    assert len(events) == 5
    assert events.p.tolist() == [1, -1, 1, -1, 1]
    assert events.x.tolist() == [10.0, 11.0, 12.5, 63.0, 20.0]
    assert events.reference_time == pytest.approx(1e-4)


def test_events_outside_the_sensor_are_skipped() -> None:
    events, skipped = read_events(io.StringIO(EVENTS_TEXT), resolution=(16, 40))
    assert skipped == 2
    assert events.x.tolist() == [10.0, 11.0, 12.5]
    kept, none_skipped = read_events(io.StringIO(EVENTS_TEXT), camera=SMALL_CAMERA)
    assert none_skipped == 0
    assert len(kept) == 5


def test_relative_time_records_the_offset() -> None:
    events: EventSlice = load_events(io.StringIO("10.5 1 1 1\n10.75 2 1 0\n"), relative_time=True)
    assert events.t.tolist() == pytest.approx([0.0, 0.25])
    assert events.time_offset == pytest.approx(10.5)


def test_reads_byte_streams_and_paths(tmp_path: Path) -> None:
    path: Path = tmp_path / "events.txt"
    path.write_text(EVENTS_TEXT + "\n", encoding="utf-8")
    from_path: EventSlice = load_events(path)
    from_bytes: EventSlice = load_events(io.BytesIO(EVENTS_TEXT.encode("utf-8")))
    assert np.array_equal(from_path.t, from_bytes.t)


def test_comments_and_blank_lines_are_ignored() -> None:
    events: EventSlice = load_events(io.StringIO("# t x y p\n\n0.1 1 1 1\n\n0.2 2 2 0\n"))
    assert len(events) == 2


@pytest.mark.parametrize(
    ("text", "line_number", "message"),
    [
        ("0.1 1 1 1\n0.2 1 1 2\n", 2, "polarity must be 0 or 1"),
        ("0.1 1 1 1\n# note\n0.05 1 1 1\n", 3, "non-decreasing"),
        ("-0.1 1 1 1\n", 1, "non-negative"),
        ("0.1 1 1 1\n0.2 1 1\n", 2, "expected 4 values, found 3"),
        ("0.1 1 1 1\n0.2 a 1 1\n", 2, "non-numeric"),
    ],
)
def test_malformed_event_lines_report_their_line_number(text: str, line_number: int, message: str) -> None:
    with pytest.raises(EventFormatError, match=message) as excinfo:
        read_events(io.StringIO(text))
    assert excinfo.value.line_number == line_number
    assert f":{line_number}:" in str(excinfo.value)


def test_calibration_infers_the_sensor_size() -> None:
    camera: CameraIntrinsics = load_calibration(io.StringIO(CALIBRATION_TEXT))
    assert (camera.width, camera.height) == (64, 48)
    assert camera.fx == 100.0
    assert not camera.has_distortion


def test_calibration_with_distortion_and_explicit_resolution() -> None:
    camera: CameraIntrinsics = load_calibration(io.StringIO("200 201 120.3 90.1 -0.2 0.05 0 0 0\n"), resolution=(240, 180))
    assert (camera.width, camera.height) == (240, 180)
    assert camera.dist == (-0.2, 0.05, 0.0, 0.0, 0.0)


def test_calibration_errors() -> None:
    with pytest.raises(EventFormatError, match="at least 4 values"):
        load_calibration(io.StringIO("100 100 31.5\n"))
    with pytest.raises(EventFormatError, match="empty"):
        load_calibration(io.StringIO("# nothing here\n"))


def test_distorted_events_are_undistorted_on_ingestion() -> None:
    camera: CameraIntrinsics = CameraIntrinsics(
        fx=100.0, fy=100.0, cx=31.5, cy=23.5, width=64, height=48, dist=(-0.2, 0.0, 0.0, 0.0, 0.0)
    )
    events: EventSlice = load_events(io.StringIO("0.1 60 5 1\n0.2 31.5 23.5 1\n"), camera=camera)
    assert events.x[0] != 60.0
    assert events.x[1] == pytest.approx(31.5)
    restored: np.ndarray = camera.calibrated_to_pixel(camera.normalize(events.points()[:1]))
    assert restored == pytest.approx(np.array([[60.0, 5.0]]), abs=1e-4)


def test_trajectory_from_text() -> None:
    trajectory: PoseTrajectory = load_trajectory(io.StringIO(POSES_TEXT))
    assert len(trajectory) == 3
    assert trajectory.interpolate(0.15).translation == pytest.approx([0.15, 0.0, 0.0])
    shifted: PoseTrajectory = load_trajectory(io.StringIO(POSES_TEXT), time_offset=0.1)
    assert shifted.t_start == pytest.approx(-0.1)


def test_trajectory_errors() -> None:
    with pytest.raises(EventFormatError, match="strictly increasing"):
        load_trajectory(io.StringIO("0.1 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 1\n"))
    with pytest.raises(EventFormatError, match="zero norm") as excinfo:
        load_trajectory(io.StringIO("0.0 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 0\n"))
    assert excinfo.value.line_number == 2


def _uniform_stream(count: int = 100) -> EventSlice:
    index: np.ndarray = np.arange(count, dtype=np.float64)
    return EventSlice(t=index * 0.01, x=index % 10, y=index % 7, p=np.ones(count, dtype=np.int8))


def test_count_windows_overlap_and_drop_short_tails() -> None:
    windows: list[EventSlice] = slice_events(_uniform_stream(), SliceBy.COUNT, 40, 30)
    assert [len(window) for window in windows] == [40, 40, 40]
    assert [window.reference_time for window in windows] == pytest.approx([0.0, 0.3, 0.6])
    short: list[EventSlice] = slice_events(_uniform_stream(), SliceBy.COUNT, 40, 40, min_fill=0.75)
    assert [len(window) for window in short] == [40, 40]


def test_duration_windows_use_the_midpoint_policy() -> None:
    windows: list[EventSlice] = slice_events(
        _uniform_stream(), SliceBy.DURATION, 0.25, ref_policy=RefTimePolicy.MIDPOINT
    )
    assert [len(window) for window in windows] == [25, 25, 25, 25]
    assert windows[0].reference_time == pytest.approx(0.125)


def test_slicing_rejects_bad_sizes_and_accepts_empty_streams() -> None:
    with pytest.raises(ValueError, match="positive"):
        slice_events(_uniform_stream(), SliceBy.COUNT, 0)
    assert slice_events(EventSlice(), SliceBy.COUNT, 10) == []


def test_raster_round_trip(tmp_path: Path) -> None:
    values: np.ndarray = np.arange(12.0).reshape(3, 4)
    path: Path = write_raster(tmp_path / "iwe.raw", values, kind="count")
    raster: Raster = read_raster(path)
    assert (raster.width, raster.height, raster.kind, raster.dtype) == (4, 3, "count", "float64")
    assert np.array_equal(raster.values, values)
    single: Raster = read_raster(write_raster(tmp_path / "depth.raw", values, kind="depth", dtype="float32"))
    assert single.dtype == "float32"


@pytest.mark.parametrize(
    ("payload", "message"),
    [
        (b"no newline", "missing raster header"),
        (b"OTHER float64 2 2 count\n", "expected 'ECMX-RASTER"),
        (b"ECMX-RASTER int8 2 2 count\n", "unsupported raster dtype"),
        (b"ECMX-RASTER float64 2 x count\n", "must be integral"),
        (b"ECMX-RASTER float64 0 2 count\n", "must be positive"),
        (b"ECMX-RASTER float64 2 2 count\n" + bytes(8), "expected 32 data bytes"),
    ],
)
def test_corrupt_rasters_are_rejected(tmp_path: Path, payload: bytes, message: str) -> None:
    path: Path = tmp_path / "broken.raw"
    path.write_bytes(payload)
    with pytest.raises(RasterFormatError, match=message):
        read_raster(path)
