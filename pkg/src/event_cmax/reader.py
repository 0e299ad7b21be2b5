"""Parsers for the event-camera dataset text formats and event-stream slicing."""

from __future__ import annotations

import io
import math
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import IO, TypeAlias

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import NDArray

from .classes_references import EventFormatError, RasterFormatError
from .models import CameraIntrinsics, EventSlice, PoseTrajectory
from .type_helpers import RefTimePolicy, SliceBy

TextSource: TypeAlias = Path | str | IO[str] | IO[bytes]

EVENT_COLUMNS: int = 4
POSE_COLUMNS: int = 8
MIN_CALIBRATION_VALUES: int = 4
MIN_WINDOW_FILL: float = 0.5
RASTER_MAGIC: str = "ECMX-RASTER"
RASTER_DTYPES: dict[str, str] = {"float64": "<f8", "float32": "<f4"}


@dataclass(slots=True)
class _NumericLine:
    """A non-empty data line with its 1-based position in the source."""

    number: int
    text: str
    values: list[float]


class _NumericLineStream:
    """
    Iterate over numeric rows of a whitespace-separated text source.

    Blank lines and lines starting with `#` are skipped but still counted, so errors
    always report the line number an editor would show.
    """

    def __init__(self, text: str, source: str) -> None:
        self._lines: list[str] = text.splitlines()
        self.source: str = source

    @property
    def text(self) -> str:
        return "\n".join(self._lines)

    def line_text(self, number: int) -> str:
        return self._lines[number - 1]

    @classmethod
    def from_source(cls, source: TextSource) -> "_NumericLineStream":
        text, name = _read_text(source)
        return cls(text=text, source=name)

    def __iter__(self) -> Iterator[_NumericLine]:
        for index, raw in enumerate(self._lines, start=1):
            stripped: str = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            yield _NumericLine(number=index, text=raw, values=self._parse_values(stripped, index))

    def _parse_values(self, stripped: str, number: int) -> list[float]:
        try:
            return [float(token) for token in stripped.split()]
        except ValueError as exc:
            raise EventFormatError(f"non-numeric value ({exc})", line_number=number, line=stripped, source=self.source)

    def error(self, message: str, line: _NumericLine) -> EventFormatError:
        return EventFormatError(message, line_number=line.number, line=line.text, source=self.source)


def _read_text(source: TextSource) -> tuple[str, str]:
    """Return (text, display name) for a path or an open text/byte stream."""
    if isinstance(source, (str, Path)):
        path: Path = Path(source)
        return path.read_text(encoding="utf-8"), str(path)
    payload: str | bytes = source.read()
    name: str = str(getattr(source, "name", "<stream>"))
    if isinstance(payload, bytes):
        return payload.decode("utf-8"), name
    return payload, name


def _fast_table(text: str, columns: int) -> NDArray[np.float64] | None:
    """Parse a well-formed table with pandas; None when the slow, line-accurate parser must run."""
    if not text.strip():
        return np.zeros((0, columns))
    try:
        frame: pd.DataFrame = pd.read_csv(
            io.StringIO(text), sep=r"\s+", header=None, comment="#", dtype=np.float64, engine="c"
        )
    except (ValueError, pd.errors.ParserError):
        return None
    table: NDArray[np.float64] = frame.to_numpy(dtype=np.float64)
    if table.ndim != 2 or table.shape[1] != columns or not np.all(np.isfinite(table)):
        return None
    return table


def _slow_table(stream: _NumericLineStream, columns: int) -> tuple[NDArray[np.float64], list[int]]:
    rows: list[list[float]] = []
    numbers: list[int] = []
    for line in stream:
        if len(line.values) != columns:
            raise stream.error(f"expected {columns} values, found {len(line.values)}", line)
        if not all(math.isfinite(value) for value in line.values):
            raise stream.error("values must be finite", line)
        rows.append(line.values)
        numbers.append(line.number)
    table: NDArray[np.float64] = np.array(rows, dtype=np.float64).reshape(-1, columns)
    return table, numbers


def _read_table(source: TextSource, columns: int) -> tuple[NDArray[np.float64], _NumericLineStream, list[int] | None]:
    stream: _NumericLineStream = _NumericLineStream.from_source(source)
    table: NDArray[np.float64] | None = _fast_table(stream.text, columns)
    if table is not None:
        return table, stream, None
    slow_table, numbers = _slow_table(stream, columns)
    return slow_table, stream, numbers


def _line_for_row(stream: _NumericLineStream, numbers: list[int] | None, row: int) -> _NumericLine:
    """Recover the source line of a table row for error messages."""
    if numbers is None:
        numbers = [line.number for line in stream]
    number: int = numbers[row]
    return _NumericLine(number=number, text=stream.line_text(number), values=[])


def read_events(
    source: TextSource,
    resolution: tuple[int, int] | None = None,
    *,
    camera: CameraIntrinsics | None = None,
    relative_time: bool = False,
) -> tuple[EventSlice, int]:
    """
    Parse an `events.txt` stream (`t x y p` per line) and report how many lines were skipped.

    Args:
        source: Path or open stream.
        resolution: Sensor (width, height); events outside it are counted and skipped.
            Defaults to the camera size when a camera is given.
        camera: When the camera carries distortion, event pixels are undistorted on ingestion.
        relative_time: Subtract the first timestamp and record it as `time_offset`.

    Returns:
        The event slice (file order) and the number of out-of-bounds lines skipped.
    """
    table, stream, numbers = _read_table(source, EVENT_COLUMNS)
    if resolution is None and camera is not None:
        resolution = (camera.width, camera.height)

    polarity_raw: NDArray[np.float64] = table[:, 3]
    bad_polarity: NDArray[np.intp] = np.flatnonzero(~np.isin(polarity_raw, (0.0, 1.0, -1.0)))
    if bad_polarity.size:
        line: _NumericLine = _line_for_row(stream, numbers, int(bad_polarity[0]))
        raise stream.error(f"polarity must be 0 or 1 (or -1), found {polarity_raw[bad_polarity[0]]:g}", line)
    times: NDArray[np.float64] = table[:, 0]
    if np.any(times < 0.0):
        line = _line_for_row(stream, numbers, int(np.flatnonzero(times < 0.0)[0]))
        raise stream.error("timestamps must be non-negative", line)
    decreasing: NDArray[np.intp] = np.flatnonzero(np.diff(times) < 0.0)
    if decreasing.size:
        line = _line_for_row(stream, numbers, int(decreasing[0]) + 1)
        raise stream.error("timestamps must be non-decreasing", line)

    keep: NDArray[np.bool_] = np.ones(table.shape[0], dtype=bool)
    if resolution is not None:
        width, height = resolution
        keep = (
            (table[:, 1] >= -0.5) & (table[:, 1] < width - 0.5) & (table[:, 2] >= -0.5) & (table[:, 2] < height - 0.5)
        )
    skipped: int = int(np.count_nonzero(~keep))
    if skipped:
        logger.warning(
            "Skipped {skipped} of {total} events outside the {width}x{height} sensor in {source}",
            skipped=skipped,
            total=table.shape[0],
            width=resolution[0] if resolution else 0,
            height=resolution[1] if resolution else 0,
            source=stream.source,
        )
    table = table[keep]

    x: NDArray[np.float64] = table[:, 1]
    y: NDArray[np.float64] = table[:, 2]
    if camera is not None and camera.has_distortion and table.shape[0]:
        undistorted: NDArray[np.float64] = camera.undistort_pixels(table[:, 1:3])
        x, y = undistorted[:, 0], undistorted[:, 1]
    t: NDArray[np.float64] = table[:, 0]
    offset: float = 0.0
    if relative_time and t.size:
        offset = float(t[0])
        t = t - offset
    polarity: NDArray[np.int8] = np.where(table[:, 3] > 0.0, 1, -1).astype(np.int8)
    events: EventSlice = EventSlice(t=t, x=x, y=y, p=polarity, time_offset=offset)
    logger.info("Loaded {count} events from {source}", count=len(events), source=stream.source)
    return events, skipped


def load_events(
    source: TextSource,
    resolution: tuple[int, int] | None = None,
    *,
    camera: CameraIntrinsics | None = None,
    relative_time: bool = False,
) -> EventSlice:
    """Read an `events.txt` stream into an `EventSlice`; see `read_events` for the arguments."""
    events, _ = read_events(source, resolution, camera=camera, relative_time=relative_time)
    return events


def load_calibration(source: TextSource, resolution: tuple[int, int] | None = None) -> CameraIntrinsics:
    """
    Read a `calib.txt` line `fx fy cx cy [k1 k2 p1 p2 k3]`.

    Without an explicit resolution the sensor size is inferred as (floor(2 cx) + 1, floor(2 cy) + 1), which
    recovers (width, height) for a principal point at the sensor centre ((width - 1) / 2).
    """
    stream: _NumericLineStream = _NumericLineStream.from_source(source)
    lines: list[_NumericLine] = list(stream)
    if not lines:
        raise EventFormatError("calibration file is empty", line_number=1, source=stream.source)
    first: _NumericLine = lines[0]
    values: list[float] = first.values
    if len(values) < MIN_CALIBRATION_VALUES:
        raise stream.error(f"expected at least {MIN_CALIBRATION_VALUES} values (fx fy cx cy)", first)
    if len(values) > MIN_CALIBRATION_VALUES + 5:
        raise stream.error("expected at most 9 values (fx fy cx cy k1 k2 p1 p2 k3)", first)
    fx, fy, cx, cy = values[:4]
    if resolution is None:
        resolution = (math.floor(2.0 * cx) + 1, math.floor(2.0 * cy) + 1)
    camera: CameraIntrinsics = CameraIntrinsics(
        fx=fx, fy=fy, cx=cx, cy=cy, width=resolution[0], height=resolution[1], dist=tuple(values[4:])
    )
    logger.info("Loaded calibration {camera} from {source}", camera=camera.describe(), source=stream.source)
    return camera


def load_trajectory(source: TextSource, *, time_offset: float = 0.0) -> PoseTrajectory:
    """
    Read a `groundtruth.txt` / `poses.txt` stream (`t px py pz qx qy qz qw`, camera-to-world).

    Quaternions are renormalized; `time_offset` is subtracted from every timestamp so the
    trajectory can share the time base of events loaded with `relative_time=True`.
    """
    table, stream, numbers = _read_table(source, POSE_COLUMNS)
    times: NDArray[np.float64] = table[:, 0]
    not_increasing: NDArray[np.intp] = np.flatnonzero(np.diff(times) <= 0.0)
    if not_increasing.size:
        line: _NumericLine = _line_for_row(stream, numbers, int(not_increasing[0]) + 1)
        raise stream.error("pose timestamps must be strictly increasing", line)
    zero_norm: NDArray[np.intp] = np.flatnonzero(np.linalg.norm(table[:, 4:8], axis=1) == 0.0)
    if zero_norm.size:
        raise stream.error("quaternion has zero norm", _line_for_row(stream, numbers, int(zero_norm[0])))
    trajectory: PoseTrajectory = PoseTrajectory(
        times=times - time_offset, quaternions=table[:, 4:8], translations=table[:, 1:4]
    )
    logger.info("Loaded {trajectory} from {source}", trajectory=trajectory.describe(), source=stream.source)
    return trajectory


def _window_t_ref(events: EventSlice, policy: RefTimePolicy, midpoint: float) -> float:
    if policy is RefTimePolicy.MIDPOINT:
        return min(max(midpoint, float(events.t[0])), float(events.t[-1]))
    return float(events.t[0])


def slice_events(
    events: EventSlice,
    by: SliceBy = SliceBy.COUNT,
    size: float = 30_000,
    stride: float | None = None,
    *,
    ref_policy: RefTimePolicy = RefTimePolicy.FIRST,
    min_fill: float = MIN_WINDOW_FILL,
) -> list[EventSlice]:
    """
    Cut a stream into windows of `size` events (or seconds) starting every `stride`.

    A trailing window that runs past the end of the stream is kept only when it is at least
    `min_fill` full (by event count, or by time coverage for duration windows).
    """
    step: float = size if stride is None else stride
    if step <= 0 or size <= 0:
        raise ValueError(f"Window size and stride must be positive (size={size}, stride={step}).")
    windows: list[EventSlice] = []
    if events.is_empty:
        return windows

    if by is SliceBy.COUNT:
        window: int = int(size)
        count_stride: int = int(step)
        if window < 1 or count_stride < 1:
            raise ValueError("Count windows need size and stride of at least one event.")
        total: int = len(events)
        for start in range(0, total, count_stride):
            stop: int = min(start + window, total)
            if stop - start < window:
                if stop - start < min_fill * window:
                    logger.warning(
                        "Dropped trailing window of {count} events (< {fill:.0%} of {window})",
                        count=stop - start,
                        fill=min_fill,
                        window=window,
                    )
                    break
            chunk: EventSlice = events.select(np.arange(start, stop))
            windows.append(chunk.with_t_ref(_window_t_ref(chunk, ref_policy, chunk.t_mid)))
            if stop == total:
                break
    else:
        t_first: float = events.t_start
        t_last: float = events.t_end
        index: int = 0
        while (window_start := t_first + index * step) <= t_last:
            index += 1
            window_end: float = window_start + size
            if window_end > t_last and (t_last - window_start) < min_fill * size:
                logger.warning(
                    "Dropped trailing window [{start:.6f}, {end:.6f}) covering < {fill:.0%} of {size:.6f} s",
                    start=window_start,
                    end=window_end,
                    fill=min_fill,
                    size=size,
                )
                break
            lo: int = int(np.searchsorted(events.t, window_start, side="left"))
            hi: int = int(np.searchsorted(events.t, window_end, side="left"))
            if window_end > t_last:
                hi = len(events)
            if hi > lo:
                chunk = events.select(np.arange(lo, hi))
                windows.append(chunk.with_t_ref(_window_t_ref(chunk, ref_policy, window_start + 0.5 * size)))
    logger.debug("Sliced {count} events into {windows} windows", count=len(events), windows=len(windows))
    return windows


@dataclass(slots=True)
class Raster:
    """A raw grid read back from disk: values (height, width) and what they hold."""

    values: NDArray[np.float64]
    kind: str
    dtype: str

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])


def read_raster(path: Path) -> Raster:
    """
    Read a raw grid written by `writer.write_raster`.

    The file starts with one ASCII line `ECMX-RASTER <dtype> <width> <height> <kind>` followed by
    width x height little-endian values in row-major order.

    Raises:
        RasterFormatError: When the header is missing or inconsistent with the payload.
    """
    payload: bytes = Path(path).read_bytes()
    header_end: int = payload.find(b"\n")
    if header_end < 0:
        raise RasterFormatError(f"{path}: missing raster header line.")
    try:
        fields: list[str] = payload[:header_end].decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise RasterFormatError(f"{path}: raster header is not ASCII.") from exc
    if len(fields) != 5 or fields[0] != RASTER_MAGIC:
        raise RasterFormatError(f"{path}: expected '{RASTER_MAGIC} <dtype> <width> <height> <kind>' header.")
    _, dtype, width_text, height_text, kind = fields
    if dtype not in RASTER_DTYPES:
        raise RasterFormatError(f"{path}: unsupported raster dtype '{dtype}'.")
    try:
        width: int = int(width_text)
        height: int = int(height_text)
    except ValueError as exc:
        raise RasterFormatError(f"{path}: raster size must be integral, got {width_text}x{height_text}.") from exc
    if width < 1 or height < 1:
        raise RasterFormatError(f"{path}: raster size must be positive, got {width}x{height}.")
    body: bytes = payload[header_end + 1 :]
    expected: int = width * height * np.dtype(RASTER_DTYPES[dtype]).itemsize
    if len(body) != expected:
        raise RasterFormatError(f"{path}: expected {expected} data bytes for {width}x{height} {dtype}, found {len(body)}.")
    values: NDArray[np.float64] = (
        np.frombuffer(body, dtype=RASTER_DTYPES[dtype]).astype(np.float64).reshape(height, width)
    )
    logger.debug("Read {width}x{height} {kind} raster from {path}", width=width, height=height, kind=kind, path=path)
    return Raster(values=values, kind=kind, dtype=dtype)


__all__: list[str] = [
    "RASTER_DTYPES",
    "RASTER_MAGIC",
    "Raster",
    "TextSource",
    "load_calibration",
    "load_events",
    "load_trajectory",
    "read_events",
    "read_raster",
    "slice_events",
]
