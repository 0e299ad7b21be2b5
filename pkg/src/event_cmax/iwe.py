"""Image of warped events (IWE) accumulation and the contrast objective.

The IWE stores `values[row, column]` for pixel centres at integer coordinates relative to
the grid origin. A warped event is in view when it lies in [-0.5, W - 0.5) x [-0.5, H - 0.5);
mass that cannot be deposited (events out of view, or bilinear/Gaussian weight spilling past
the border) is tracked in `discarded_mass` so that sum(values) + discarded_mass = sum(b_k).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from .classes_references import ParameterError
from .models import CameraIntrinsics, EventSlice
from .models.base import Validatable
from .type_helpers import AccumulationMode, SplatKind
from .warps import WarpModel, WarpResult

DEFAULT_EPSILON: float = 1.0
TRUNCATION_FACTOR: float = 3.0
DEFAULT_GRID_MARGIN: int = 5
ACCUMULATION_CHUNK: int = 65_536
GAUSSIAN_CHUNK: int = 4_096
PATCH_SIGMA: float = 1.0
PATCH_SIZE: int = 3
MAX_DISCARD_FRACTION: float = 0.25


def _patch_weights(sigma: float = PATCH_SIGMA, size: int = PATCH_SIZE) -> NDArray[np.float64]:
    half: int = size // 2
    offsets: NDArray[np.float64] = np.arange(-half, half + 1, dtype=np.float64)
    squared: NDArray[np.float64] = offsets[None, :] ** 2 + offsets[:, None] ** 2
    return np.exp(-squared / (2.0 * sigma * sigma))


PATCH_WEIGHTS: NDArray[np.float64] = _patch_weights()


@dataclass(slots=True, frozen=True)
class GridSpec(Validatable):
    """Pixel grid of an IWE: size plus the sensor position of pixel (0, 0)."""

    width: int
    height: int
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self) -> None:
        self.assert_valid()

    @classmethod
    def for_camera(cls, camera: CameraIntrinsics) -> "GridSpec":
        return cls(width=camera.width, height=camera.height)

    @classmethod
    def for_events(cls, events: EventSlice, margin: int = DEFAULT_GRID_MARGIN) -> "GridSpec":
        """Bounding box of the event positions grown by `margin` pixels on every side."""
        if events.is_empty:
            raise ValueError("Cannot size a grid around an empty event slice.")
        left: int = math.floor(float(events.x.min()) + 0.5) - margin
        right: int = math.floor(float(events.x.max()) + 0.5) + margin
        top: int = math.floor(float(events.y.min()) + 0.5) - margin
        bottom: int = math.floor(float(events.y.max()) + 0.5) + margin
        return cls(width=right - left + 1, height=bottom - top + 1, x0=float(left), y0=float(top))

    @property
    def size(self) -> int:
        return self.width * self.height

    def validate(self, prefix: str = "") -> list[str]:
        if self.width <= 0 or self.height <= 0:
            return [f"{prefix}Grid dimensions must be positive ({self.width}x{self.height})."]
        return []

    def to_dict(self) -> dict[str, Any]:
        return {"width": self.width, "height": self.height, "x0": self.x0, "y0": self.y0}


@dataclass(slots=True)
class IWE(Validatable):
    """Accumulated image of warped events with its bookkeeping."""

    values: NDArray[np.float64]
    grid: GridSpec
    mode: AccumulationMode = AccumulationMode.COUNT
    splat: SplatKind = SplatKind.BILINEAR
    epsilon: float = DEFAULT_EPSILON
    n_events: int = 0
    n_discarded: int = 0
    discarded_mass: float = 0.0

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def height(self) -> int:
        return self.grid.height

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @property
    def discard_fraction(self) -> float:
        return self.n_discarded / self.n_events if self.n_events else 0.0

    def describe(self) -> str:
        return (
            f"IWE({self.width}x{self.height}, mode={self.mode.value}, splat={self.splat.value}, "
            f"events={self.n_events}, discarded={self.n_discarded})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.values.shape != (self.grid.height, self.grid.width):
            errors.append(f"{prefix}IWE values shape {self.values.shape} does not match the grid.")
        if self.mode is AccumulationMode.COUNT and self.values.size and float(self.values.min()) < 0.0:
            errors.append(f"{prefix}Count-mode IWE values must be non-negative.")
        return errors


@dataclass(slots=True, frozen=True)
class ContrastValue:
    """Population variance f of the IWE and its mean."""

    f: float
    mean: float


@dataclass(slots=True)
class IWEHistogram:
    """Equal-width histogram of IWE values plus the count of exactly-zero pixels."""

    counts: NDArray[np.int64]
    edges: NDArray[np.float64]
    zero_count: int

    def to_dict(self) -> dict[str, Any]:
        return {"counts": self.counts.tolist(), "edges": self.edges.tolist(), "zero_count": self.zero_count}


def gaussian_splat_kernel(epsilon: float = DEFAULT_EPSILON, radius: float | None = None) -> NDArray[np.float64]:
    """Discrete Gaussian N(0, eps^2 I) on integer offsets within `radius`, normalized to sum 1."""
    truncation: float = TRUNCATION_FACTOR * epsilon if radius is None else radius
    if epsilon <= 0.0:
        raise ValueError(f"Gaussian splat width must be positive, got {epsilon}.")
    if truncation < 2.0 * epsilon:
        raise ValueError(f"Truncation radius {truncation} must be at least 2 * epsilon ({2.0 * epsilon}).")
    half: int = math.floor(truncation)
    offsets: NDArray[np.float64] = np.arange(-half, half + 1, dtype=np.float64)
    squared: NDArray[np.float64] = offsets[None, :] ** 2 + offsets[:, None] ** 2
    kernel: NDArray[np.float64] = np.where(
        squared <= truncation * truncation, np.exp(-squared / (2.0 * epsilon * epsilon)), 0.0
    )
    return kernel / kernel.sum()


@dataclass(slots=True)
class _Deposits:
    """Flat pixel indices and weights produced by one splat of one chunk."""

    indices: NDArray[np.intp]
    weights: NDArray[np.float64]
    spilled: float


def _splat_nearest(u: NDArray[np.float64], v: NDArray[np.float64], b: NDArray[np.float64], grid: GridSpec) -> _Deposits:
    columns: NDArray[np.intp] = np.floor(u + 0.5).astype(np.intp)
    rows: NDArray[np.intp] = np.floor(v + 0.5).astype(np.intp)
    return _Deposits(indices=rows * grid.width + columns, weights=b, spilled=0.0)


def _splat_bilinear(u: NDArray[np.float64], v: NDArray[np.float64], b: NDArray[np.float64], grid: GridSpec) -> _Deposits:
    left: NDArray[np.float64] = np.floor(u)
    top: NDArray[np.float64] = np.floor(v)
    fx: NDArray[np.float64] = u - left
    fy: NDArray[np.float64] = v - top
    columns: NDArray[np.intp] = np.stack((left, left + 1, left, left + 1), axis=1).astype(np.intp)
    rows: NDArray[np.intp] = np.stack((top, top, top + 1, top + 1), axis=1).astype(np.intp)
    corner_weights: NDArray[np.float64] = np.stack(
        ((1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy), axis=1
    ) * b[:, None]
    inside: NDArray[np.bool_] = (columns >= 0) & (columns < grid.width) & (rows >= 0) & (rows < grid.height)
    spilled: float = float(corner_weights[~inside].sum())
    return _Deposits(
        indices=(rows * grid.width + columns)[inside], weights=corner_weights[inside], spilled=spilled
    )


def _splat_gaussian(
    u: NDArray[np.float64],
    v: NDArray[np.float64],
    b: NDArray[np.float64],
    grid: GridSpec,
    epsilon: float,
    radius: float,
) -> _Deposits:
    """Tapered truncated Gaussian, renormalized per event so deposits move continuously with the event."""
    half: int = math.ceil(radius + 0.5)
    offsets: NDArray[np.intp] = np.arange(-half, half + 1, dtype=np.intp)
    dx: NDArray[np.intp] = np.tile(offsets, offsets.size)
    dy: NDArray[np.intp] = np.repeat(offsets, offsets.size)
    centre_columns: NDArray[np.intp] = np.floor(u + 0.5).astype(np.intp)
    centre_rows: NDArray[np.intp] = np.floor(v + 0.5).astype(np.intp)
    columns: NDArray[np.intp] = centre_columns[:, None] + dx[None, :]
    rows: NDArray[np.intp] = centre_rows[:, None] + dy[None, :]
    squared: NDArray[np.float64] = (columns - u[:, None]) ** 2 + (rows - v[:, None]) ** 2
    two_var: float = 2.0 * epsilon * epsilon
    raw: NDArray[np.float64] = np.exp(-squared / two_var) - math.exp(-(radius * radius) / two_var)
    raw = np.where(squared < radius * radius, np.maximum(raw, 0.0), 0.0)
    norms: NDArray[np.float64] = raw.sum(axis=1)
    degenerate: NDArray[np.bool_] = norms <= 0.0
    if np.any(degenerate):
        # Support narrower than a pixel: fall back to the nearest pixel.
        centre_index: int = int(np.flatnonzero((dx == 0) & (dy == 0))[0])
        raw[degenerate] = 0.0
        raw[degenerate, centre_index] = 1.0
        norms = np.where(degenerate, 1.0, norms)
    weights: NDArray[np.float64] = raw * (b / norms)[:, None]
    inside: NDArray[np.bool_] = (columns >= 0) & (columns < grid.width) & (rows >= 0) & (rows < grid.height)
    spilled: float = float(weights[~inside].sum())
    return _Deposits(indices=(rows * grid.width + columns)[inside], weights=weights[inside], spilled=spilled)


def accumulate_points(
    points: ArrayLike,
    weights: ArrayLike,
    grid: GridSpec,
    splat: SplatKind = SplatKind.BILINEAR,
    *,
    valid: ArrayLike | None = None,
    mode: AccumulationMode = AccumulationMode.COUNT,
    epsilon: float = DEFAULT_EPSILON,
    radius: float | None = None,
    chunk_size: int | None = None,
) -> IWE:
    """
    Deposit weighted positions into a grid.

    Events are processed in fixed-size chunks whose partial images are summed in chunk
    order, so the result does not depend on how callers parallelize around it.
    """
    positions: NDArray[np.float64] = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    b: NDArray[np.float64] = np.asarray(weights, dtype=np.float64).reshape(-1)
    count: int = positions.shape[0]
    mask: NDArray[np.bool_] = np.ones(count, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    truncation: float = TRUNCATION_FACTOR * epsilon if radius is None else radius
    if splat is SplatKind.GAUSSIAN and epsilon <= 0.0:
        raise ValueError(f"Gaussian splat width must be positive, got {epsilon}.")
    step: int = chunk_size or (GAUSSIAN_CHUNK if splat is SplatKind.GAUSSIAN else ACCUMULATION_CHUNK)

    flat: NDArray[np.float64] = np.zeros(grid.size, dtype=np.float64)
    n_discarded: int = 0
    discarded_mass: float = 0.0
    for start in range(0, count, step):
        stop: int = min(start + step, count)
        u: NDArray[np.float64] = positions[start:stop, 0] - grid.x0
        v: NDArray[np.float64] = positions[start:stop, 1] - grid.y0
        chunk_b: NDArray[np.float64] = b[start:stop]
        in_view: NDArray[np.bool_] = (
            mask[start:stop] & (u >= -0.5) & (u < grid.width - 0.5) & (v >= -0.5) & (v < grid.height - 0.5)
        )
        n_discarded += int(np.count_nonzero(~in_view))
        discarded_mass += float(chunk_b[~in_view].sum())
        u, v, chunk_b = u[in_view], v[in_view], chunk_b[in_view]
        if splat is SplatKind.NEAREST:
            deposits: _Deposits = _splat_nearest(u, v, chunk_b, grid)
        elif splat is SplatKind.BILINEAR:
            deposits = _splat_bilinear(u, v, chunk_b, grid)
        else:
            deposits = _splat_gaussian(u, v, chunk_b, grid, epsilon, truncation)
        flat += np.bincount(deposits.indices, weights=deposits.weights, minlength=grid.size)
        discarded_mass += deposits.spilled

    return IWE(
        values=flat.reshape(grid.height, grid.width),
        grid=grid,
        mode=mode,
        splat=splat,
        epsilon=epsilon,
        n_events=count,
        n_discarded=n_discarded,
        discarded_mass=discarded_mass,
    )


def accumulate(
    events: EventSlice,
    model: WarpModel,
    theta: ArrayLike,
    grid: GridSpec,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
    *,
    epsilon: float = DEFAULT_EPSILON,
    radius: float | None = None,
) -> IWE:
    """Warp every event with `model` at parameters `theta` and accumulate the result, H(x) = sum_k b_k delta(x - x'_k)."""
    if events.is_empty:
        return IWE(values=np.zeros((grid.height, grid.width)), grid=grid, mode=mode, splat=splat, epsilon=epsilon)
    warped: WarpResult = model.warp(events, np.asarray(theta, dtype=np.float64))
    return accumulate_points(
        warped.points,
        events.weights(mode),
        grid,
        splat,
        valid=warped.valid,
        mode=mode,
        epsilon=epsilon,
        radius=radius,
    )


def contrast(iwe: IWE) -> ContrastValue:
    """Population variance over all pixels, zeros included."""
    if iwe.values.size == 0:
        raise ValueError("Contrast needs a non-empty IWE.")
    return ContrastValue(f=float(np.var(iwe.values)), mean=float(np.mean(iwe.values)))


def weighted_patch_contrast(
    iwe: IWE, center: tuple[int, int], weights: NDArray[np.float64] | None = None
) -> float:
    """
    Variance of the Gaussian-weighted patch w(x) H(x) around `center` = (column, row).

    Args:
        iwe: The image of warped events.
        center: Integer pixel (column, row); the full patch must lie inside the grid.
        weights: Patch weights; defaults to the 3x3 Gaussian with sigma 1 px and peak weight 1.
    """
    kernel: NDArray[np.float64] = PATCH_WEIGHTS if weights is None else np.asarray(weights, dtype=np.float64)
    half: int = kernel.shape[0] // 2
    column, row = center
    if not (half <= column < iwe.width - half and half <= row < iwe.height - half):
        raise ValueError(f"Patch centre {center} is too close to the border of a {iwe.width}x{iwe.height} IWE.")
    patch: NDArray[np.float64] = iwe.values[row - half : row + half + 1, column - half : column + half + 1]
    return float(np.var(kernel * patch))


def patch_contrast_map(values: NDArray[np.float64], weights: NDArray[np.float64] | None = None) -> NDArray[np.float64]:
    """`weighted_patch_contrast` at every pixel at once; border pixels without a full patch are 0."""
    kernel: NDArray[np.float64] = PATCH_WEIGHTS if weights is None else np.asarray(weights, dtype=np.float64)
    half: int = kernel.shape[0] // 2
    n: float = float(kernel.size)
    first: NDArray[np.float64] = ndimage.correlate(values, kernel, mode="constant", cval=0.0) / n
    second: NDArray[np.float64] = ndimage.correlate(values * values, kernel * kernel, mode="constant", cval=0.0) / n
    result: NDArray[np.float64] = np.maximum(second - first * first, 0.0)
    if half:
        result[:half, :] = 0.0
        result[-half:, :] = 0.0
        result[:, :half] = 0.0
        result[:, -half:] = 0.0
    return result


def histogram(iwe: IWE, bins: int) -> IWEHistogram:
    """Equal-width bins over [min, max] of the IWE values; exact zeros are also counted separately."""
    if bins < 2:
        raise ValueError(f"A histogram needs at least 2 bins, got {bins}.")
    values: NDArray[np.float64] = iwe.values.ravel()
    counts, edges = np.histogram(values, bins=bins)
    return IWEHistogram(
        counts=counts.astype(np.int64), edges=edges, zero_count=int(np.count_nonzero(values == 0.0))
    )


@dataclass(slots=True)
class ContrastObjective:
    """f(theta) = Var(IWE(theta)) for one slice, warp model and grid; counts its evaluations.

    Parameters the warp rejects as geometrically invalid (singular homography, non-positive
    depth) evaluate to -inf so line searches shrink away from them.
    """

    events: EventSlice
    model: WarpModel
    grid: GridSpec
    mode: AccumulationMode = AccumulationMode.COUNT
    splat: SplatKind = SplatKind.BILINEAR
    epsilon: float = DEFAULT_EPSILON
    radius: float | None = None
    evaluations: int = field(default=0, init=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def iwe(self, theta: ArrayLike) -> IWE:
        return accumulate(
            self.events,
            self.model,
            theta,
            self.grid,
            self.mode,
            self.splat,
            epsilon=self.epsilon,
            radius=self.radius,
        )

    def __call__(self, theta: ArrayLike) -> float:
        with self._lock:
            self.evaluations += 1
        try:
            return contrast(self.iwe(theta)).f
        except ParameterError as exc:
            logger.debug("Rejected parameters {theta}: {error}", theta=np.asarray(theta).tolist(), error=str(exc))
            return -math.inf


def objective(
    events: EventSlice,
    model: WarpModel,
    theta: ArrayLike,
    grid: GridSpec,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
) -> float:
    """Contrast of the IWE of `events` warped with `model` at `theta`."""
    return contrast(accumulate(events, model, theta, grid, mode, splat)).f
