"""
Depth from a known camera trajectory by plane sweep.

Events are transferred into a reference ("virtual") view through fronto-parallel planes
at candidate depths; the depth whose image of warped events is sharpest wins. Per patch this
gives a contrast-versus-depth curve; per pixel, with 3x3 Gaussian-weighted patches, it gives
a semi-dense depth map selected by adaptive thresholding of the maximum contrast.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from ..iwe import IWE, ContrastObjective, GridSpec, accumulate_points, patch_contrast_map
from ..models import CameraIntrinsics, EventSlice, Pose, PoseTrajectory
from ..optimize import golden_section_max
from ..type_helpers import AccumulationMode, SplatKind
from ..warps import PlaneDepthWarp, PlaneTransfer, WarpResult

DEFAULT_DEPTH_RANGE: tuple[float, float] = (0.45, 2.4)
DEFAULT_DEPTH_STEPS: int = 50
DEFAULT_PATCH_SIZE: int = 31
DEFAULT_ADAPTIVE_BLOCK: int = 15
DEFAULT_ADAPTIVE_OFFSET: float = 0.0
DEFAULT_MEDIAN_SIZE: int = 3
DEFAULT_REFINE_TOLERANCE: float = 1e-4


def depth_samples(
    z_range: tuple[float, float] = DEFAULT_DEPTH_RANGE, steps: int = DEFAULT_DEPTH_STEPS
) -> NDArray[np.float64]:
    """Log-uniform depth hypotheses over `z_range` (m)."""
    near, far = z_range
    if not 0.0 < near < far:
        raise ValueError(f"Depth range must satisfy 0 < near < far, got {z_range}.")
    if steps < 2:
        raise ValueError(f"A depth sweep needs at least 2 samples, got {steps}.")
    return np.geomspace(near, far, steps)


def reference_pose(events: EventSlice, trajectory: PoseTrajectory) -> Pose:
    """Default virtual view: the camera pose at the temporal midpoint of the events."""
    return trajectory.interpolate(events.t_mid)


@dataclass(slots=True)
class DepthResult:
    """Contrast-versus-depth curve of one patch with its sampled and refined maxima."""

    depths: NDArray[np.float64]
    contrasts: NDArray[np.float64]
    z_star: float
    f_star: float
    z_refined: float
    f_refined: float
    center: tuple[int, int]
    patch_size: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"z": self.depths, "f": self.contrasts})

    def describe(self) -> str:
        return (
            f"DepthResult(z*={self.z_star:.4f} m, z_refined={self.z_refined:.4f} m, "
            f"f*={self.f_star:.6g}, samples={self.depths.size})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {
            "z_star": self.z_star,
            "f_star": self.f_star,
            "z_refined": self.z_refined,
            "f_refined": self.f_refined,
            "center": list(self.center),
            "patch_size": self.patch_size,
            "samples": int(self.depths.size),
        }


def _patch_grid(center: tuple[int, int], size: int) -> GridSpec:
    half: int = size // 2
    return GridSpec(width=size, height=size, x0=float(center[0] - half), y0=float(center[1] - half))


def depth_for_patch(
    events: EventSlice,
    trajectory: PoseTrajectory,
    camera: CameraIntrinsics,
    *,
    reference: Pose | None = None,
    center: tuple[int, int] | None = None,
    z_range: tuple[float, float] = DEFAULT_DEPTH_RANGE,
    z_steps: int = DEFAULT_DEPTH_STEPS,
    patch_size: int = DEFAULT_PATCH_SIZE,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
    refine_tol: float = DEFAULT_REFINE_TOLERANCE,
) -> DepthResult:
    """
    Sweep the depth of one reference-view patch and refine the best sample.

    Args:
        events: Events observed along `trajectory`.
        trajectory: Camera-to-world poses covering every event time.
        camera: Intrinsics of the (undistorted) event coordinates.
        reference: Reference view; defaults to the pose at the events' mid time.
        center: Patch centre (column, row) in the reference view; defaults to the sensor centre.
        z_range: Swept depth range (m), sampled log-uniformly.
        z_steps: Number of depth samples.
        patch_size: Side of the square patch in pixels.
        mode: Count or polarity accumulation.
        splat: Splat kernel.
        refine_tol: Relative width at which golden-section refinement stops.

    Raises:
        TrajectoryRangeError: When an event lies outside the trajectory.
    """
    view: Pose = reference if reference is not None else reference_pose(events, trajectory)
    patch_center: tuple[int, int] = center if center is not None else (camera.width // 2, camera.height // 2)
    grid: GridSpec = _patch_grid(patch_center, patch_size)
    model: PlaneDepthWarp = PlaneDepthWarp(camera, trajectory, view)
    objective: ContrastObjective = ContrastObjective(events, model, grid, mode, splat)
    depths: NDArray[np.float64] = depth_samples(z_range, z_steps)
    contrasts: NDArray[np.float64] = np.array([objective(np.array([z])) for z in depths])
    best: int = int(np.argmax(contrasts))
    z_star: float = float(depths[best])
    f_star: float = float(contrasts[best])

    lower: float = float(depths[max(best - 1, 0)])
    upper: float = float(depths[min(best + 1, depths.size - 1)])
    z_refined, f_refined = golden_section_max(
        lambda z: objective(np.array([z])), lower, upper, tol=refine_tol * z_star
    )
    if f_refined < f_star:
        z_refined, f_refined = z_star, f_star
    result: DepthResult = DepthResult(
        depths=depths,
        contrasts=contrasts,
        z_star=z_star,
        f_star=f_star,
        z_refined=z_refined,
        f_refined=f_refined,
        center=patch_center,
        patch_size=patch_size,
    )
    logger.info("Patch depth at {center}: {result}", center=patch_center, result=result.describe())
    return result


@dataclass(slots=True)
class SemiDenseDepthMap:
    """Per-pixel depth (NaN where unselected), the maximum-contrast map and the selection mask."""

    depth: NDArray[np.float64]
    contrast_map: NDArray[np.float64]
    mask: NDArray[np.bool_]
    z_grid: NDArray[np.float64]
    n_events: int = 0

    @classmethod
    def empty(cls, camera: CameraIntrinsics, z_grid: NDArray[np.float64]) -> "SemiDenseDepthMap":
        shape: tuple[int, int] = (camera.height, camera.width)
        return cls(
            depth=np.full(shape, np.nan),
            contrast_map=np.zeros(shape),
            mask=np.zeros(shape, dtype=bool),
            z_grid=z_grid,
        )

    @property
    def selected(self) -> int:
        return int(np.count_nonzero(self.mask))

    def rms_error(self, truth: ArrayLike) -> float:
        """RMS depth error (m) over the selected pixels; NaN when nothing is selected."""
        if self.selected == 0:
            return math.nan
        expected: NDArray[np.float64] = np.broadcast_to(np.asarray(truth, dtype=np.float64), self.depth.shape)
        difference: NDArray[np.float64] = self.depth[self.mask] - expected[self.mask]
        return float(np.sqrt(np.mean(np.square(difference))))

    def fraction_within(self, truth: ArrayLike, relative: float) -> float:
        """Fraction of selected pixels whose depth is within `relative` of the truth."""
        if self.selected == 0:
            return math.nan
        expected: NDArray[np.float64] = np.broadcast_to(np.asarray(truth, dtype=np.float64), self.depth.shape)
        error: NDArray[np.float64] = np.abs(self.depth[self.mask] - expected[self.mask]) / expected[self.mask]
        return float(np.mean(error <= relative))

    def describe(self) -> str:
        return f"SemiDenseDepthMap({self.depth.shape[1]}x{self.depth.shape[0]}, selected={self.selected})"

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        finite: NDArray[np.float64] = self.depth[self.mask]
        return {
            "width": int(self.depth.shape[1]),
            "height": int(self.depth.shape[0]),
            "selected": self.selected,
            "n_events": self.n_events,
            "z_min": float(self.z_grid.min()),
            "z_max": float(self.z_grid.max()),
            "z_steps": int(self.z_grid.size),
            "depth_median": float(np.median(finite)) if finite.size else None,
        }


def adaptive_threshold(
    values: NDArray[np.float64], block_size: int = DEFAULT_ADAPTIVE_BLOCK, offset: float = DEFAULT_ADAPTIVE_OFFSET
) -> NDArray[np.bool_]:
    """Pixels above the mean of their `block_size` x `block_size` neighbourhood plus `offset`."""
    local_mean: NDArray[np.float64] = ndimage.uniform_filter(values, size=block_size, mode="nearest")
    return (values > local_mean + offset) & (values > 0.0)


def nan_median_filter(values: NDArray[np.float64], size: int = DEFAULT_MEDIAN_SIZE) -> NDArray[np.float64]:
    """Median over each `size` x `size` neighbourhood ignoring NaN; all-NaN neighbourhoods stay NaN."""
    half: int = size // 2
    padded: NDArray[np.float64] = np.pad(values, half, mode="constant", constant_values=np.nan)
    windows: NDArray[np.float64] = sliding_window_view(padded, (size, size)).reshape(values.shape + (size * size,))
    result: NDArray[np.float64] = np.full(values.shape, np.nan)
    populated: NDArray[np.bool_] = np.any(np.isfinite(windows), axis=2)
    result[populated] = np.nanmedian(windows[populated], axis=1)
    return result


def semidense_depth(
    events: EventSlice,
    trajectory: PoseTrajectory,
    camera: CameraIntrinsics,
    *,
    reference: Pose | None = None,
    z_grid: NDArray[np.float64] | None = None,
    block_size: int = DEFAULT_ADAPTIVE_BLOCK,
    offset: float = DEFAULT_ADAPTIVE_OFFSET,
    median_size: int = DEFAULT_MEDIAN_SIZE,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
    threads: int = 1,
) -> SemiDenseDepthMap:
    """
    Semi-dense depth map of the reference view.

    For every depth hypothesis the events are transferred into the reference view once and
    the 3x3 Gaussian-weighted patch contrast is evaluated at every pixel. Each pixel keeps the
    depth of its maximum contrast; pixels whose maximum contrast beats the local mean are
    selected, and their depths are median filtered.
    """
    depths: NDArray[np.float64] = depth_samples() if z_grid is None else np.asarray(z_grid, dtype=np.float64)
    if events.is_empty:
        return SemiDenseDepthMap.empty(camera, depths)
    view: Pose = reference if reference is not None else reference_pose(events, trajectory)
    transfer: PlaneTransfer = PlaneTransfer.build(events.points(), events.t, trajectory, view, camera)
    weights: NDArray[np.float64] = events.weights(mode)
    grid: GridSpec = GridSpec.for_camera(camera)

    def contrast_at(z: float) -> NDArray[np.float64]:
        warped: WarpResult = transfer.warp(z)
        iwe: IWE = accumulate_points(warped.points, weights, grid, splat, valid=warped.valid, mode=mode)
        return patch_contrast_map(iwe.values)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        maps: list[NDArray[np.float64]] = list(pool.map(contrast_at, depths.tolist()))
    stack: NDArray[np.float64] = np.stack(maps)
    best: NDArray[np.intp] = np.argmax(stack, axis=0)
    contrast_map: NDArray[np.float64] = np.take_along_axis(stack, best[None], axis=0)[0]
    raw_depth: NDArray[np.float64] = depths[best]
    mask: NDArray[np.bool_] = adaptive_threshold(contrast_map, block_size, offset)
    filtered: NDArray[np.float64] = nan_median_filter(np.where(mask, raw_depth, np.nan), median_size)
    depth: NDArray[np.float64] = np.where(mask, filtered, np.nan)
    depth_map: SemiDenseDepthMap = SemiDenseDepthMap(
        depth=depth, contrast_map=contrast_map, mask=mask & np.isfinite(depth), z_grid=depths, n_events=len(events)
    )
    logger.info("Semi-dense depth from {events}: {map}", events=events.describe(), map=depth_map.describe())
    return depth_map


@dataclass(slots=True)
class DepthCountRun:
    """One `depth_vs_event_count` run: events used, map and (when truth is given) RMS error."""

    count: int
    depth_map: SemiDenseDepthMap
    rms: float

    def to_dict(self) -> dict[str, Any]:
        return {"count": self.count, "selected": self.depth_map.selected, "rms": self.rms}


def depth_vs_event_count(
    events: EventSlice,
    trajectory: PoseTrajectory,
    camera: CameraIntrinsics,
    counts: list[int],
    *,
    truth: ArrayLike | None = None,
    reference: Pose | None = None,
    z_grid: NDArray[np.float64] | None = None,
    threads: int = 1,
) -> list[DepthCountRun]:
    """
    Semi-dense depth from the first N events for every N in `counts`.

    All runs share one reference view (default: the pose at the mid time of the full slice).
    Counts beyond the slice are clamped to its length with a warning.
    """
    view: Pose | None = reference
    if view is None and not events.is_empty:
        view = reference_pose(events, trajectory)
    runs: list[DepthCountRun] = []
    for requested in counts:
        count: int = requested
        if requested > len(events):
            logger.warning(
                "Requested {requested} events but the slice holds {available}; using all of them",
                requested=requested,
                available=len(events),
            )
            count = len(events)
        depth_map: SemiDenseDepthMap = semidense_depth(
            events.prefix(count), trajectory, camera, reference=view, z_grid=z_grid, threads=threads
        )
        rms: float = depth_map.rms_error(truth) if truth is not None else math.nan
        runs.append(DepthCountRun(count=count, depth_map=depth_map, rms=rms))
        logger.info(
            "Depth with {count} events: {selected} pixels, rms={rms}", count=count, selected=depth_map.selected, rms=rms
        )
    return runs

