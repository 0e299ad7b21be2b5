"""Sliding-window angular-velocity tracking for a rotating camera."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from ..iwe import MAX_DISCARD_FRACTION, ContrastObjective, GridSpec
from ..models import CameraIntrinsics, EventSlice
from ..models.base import Validatable
from ..optimize import DEFAULT_TOLERANCE, OptimResult, SearchGrid, conjugate_gradient_ascent, grid_search
from ..reader import slice_events
from ..type_helpers import AccumulationMode, CGVariant, RefTimePolicy, SliceBy, SplatKind
from ..warps import RotationWarp

DEFAULT_WINDOW_EVENTS: int = 30_000
DEFAULT_TRACKING_ITERATIONS: int = 40
DEFAULT_TRACKING_RTOL: float = 1e-6
DEFAULT_MIN_EVENTS: int = 100
MIN_CONTRAST_GAIN: float = 1.05


@dataclass(slots=True)
class AngularVelocitySample:
    """Estimate for one window: mid time (s), warp angular velocity (rad/s) and diagnostics."""

    t_mid: float
    omega: NDArray[np.float64]
    f_star: float
    f_zero: float
    n_events: int
    discard_fraction: float = 0.0
    evaluations: int = 0
    converged: bool = True
    low_confidence: bool = False


@dataclass(slots=True)
class AngularVelocitySeries(Validatable):
    """Time-ordered per-window angular-velocity estimates."""

    samples: list[AngularVelocitySample] = field(default_factory=list[AngularVelocitySample])

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> NDArray[np.float64]:
        return np.array([sample.t_mid for sample in self.samples], dtype=np.float64)

    @property
    def omegas(self) -> NDArray[np.float64]:
        return np.array([sample.omega for sample in self.samples], dtype=np.float64).reshape(-1, 3)

    @property
    def low_confidence(self) -> NDArray[np.bool_]:
        return np.array([sample.low_confidence for sample in self.samples], dtype=bool)

    def confident(self) -> "AngularVelocitySeries":
        return AngularVelocitySeries([sample for sample in self.samples if not sample.low_confidence])

    def to_frame(self) -> pd.DataFrame:
        """Table with columns t, wx, wy, wz, f, n_events plus the diagnostic columns."""
        omegas: NDArray[np.float64] = self.omegas
        return pd.DataFrame(
            {
                "t": self.times,
                "wx": omegas[:, 0],
                "wy": omegas[:, 1],
                "wz": omegas[:, 2],
                "f": [sample.f_star for sample in self.samples],
                "n_events": [sample.n_events for sample in self.samples],
                "f_zero": [sample.f_zero for sample in self.samples],
                "discard_fraction": [sample.discard_fraction for sample in self.samples],
                "low_confidence": self.low_confidence,
            }
        )

    def describe(self) -> str:
        if not self.samples:
            return "AngularVelocitySeries(samples=0)"
        return (
            f"AngularVelocitySeries(samples={len(self)}, t=[{self.samples[0].t_mid:.4f}, "
            f"{self.samples[-1].t_mid:.4f}], low_confidence={int(self.low_confidence.sum())})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def validate(self, prefix: str = "") -> list[str]:
        if len(self.samples) > 1 and not np.all(np.diff(self.times) > 0.0):
            return [f"{prefix}Sample mid times must be strictly increasing."]
        return []


@dataclass(slots=True)
class TrackingConfig(Validatable):
    """Windowing and optimizer settings for `track_rotation`.

    `stride` defaults to half the window. `initial_search`, when set, runs a grid search on
    every window that has no warm start (the first one, or all of them without warm starting).
    """

    window: int = DEFAULT_WINDOW_EVENTS
    stride: int | None = None
    warm_start: bool = True
    mode: AccumulationMode = AccumulationMode.COUNT
    splat: SplatKind = SplatKind.BILINEAR
    variant: CGVariant = CGVariant.POLAK_RIBIERE_PLUS
    max_iter: int = DEFAULT_TRACKING_ITERATIONS
    tol: float = DEFAULT_TOLERANCE
    f_rtol: float = DEFAULT_TRACKING_RTOL
    min_events: int = DEFAULT_MIN_EVENTS
    omega0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    initial_search: SearchGrid | None = None

    @property
    def effective_stride(self) -> int:
        return self.stride if self.stride is not None else max(1, self.window // 2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "window": self.window,
            "stride": self.effective_stride,
            "warm_start": self.warm_start,
            "mode": self.mode.value,
            "splat": self.splat.value,
            "variant": self.variant.value,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "f_rtol": self.f_rtol,
            "min_events": self.min_events,
            "omega0": list(self.omega0),
            "initial_search": self.initial_search.to_dict() if self.initial_search is not None else None,
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.window < 1:
            errors.append(f"{prefix}Window must hold at least one event, got {self.window}.")
        if self.stride is not None and self.stride < 1:
            errors.append(f"{prefix}Stride must be positive, got {self.stride}.")
        if self.max_iter < 0:
            errors.append(f"{prefix}Iteration limit must be non-negative, got {self.max_iter}.")
        if self.initial_search is not None and self.initial_search.dim != 3:
            errors.append(f"{prefix}The initial angular-velocity search must be three-dimensional.")
        return errors


def _estimate_window(
    window: EventSlice,
    camera: CameraIntrinsics,
    config: TrackingConfig,
    start: NDArray[np.float64] | None,
    grid: GridSpec,
) -> AngularVelocitySample:
    model: RotationWarp = RotationWarp(camera)
    objective: ContrastObjective = ContrastObjective(window, model, grid, config.mode, config.splat)
    theta0: NDArray[np.float64] = np.array(config.omega0, dtype=np.float64) if start is None else start
    evaluations: int = 0
    if start is None and config.initial_search is not None:
        coarse, _ = grid_search(objective, config.initial_search)
        theta0 = coarse.theta_star
        evaluations += coarse.evaluations
    result: OptimResult = conjugate_gradient_ascent(
        objective,
        theta0,
        variant=config.variant,
        scales=model.scales(window),
        gradient_step=model.gradient_steps(),
        max_iter=config.max_iter,
        tol=config.tol,
        f_rtol=config.f_rtol,
    )
    f_zero: float = objective(np.zeros(3))
    discard_fraction: float = objective.iwe(result.theta_star).discard_fraction
    low_confidence: bool = discard_fraction > MAX_DISCARD_FRACTION or result.f_star < MIN_CONTRAST_GAIN * f_zero
    return AngularVelocitySample(
        t_mid=window.t_mid,
        omega=result.theta_star,
        f_star=result.f_star,
        f_zero=f_zero,
        n_events=len(window),
        discard_fraction=discard_fraction,
        evaluations=evaluations + result.evaluations,
        converged=result.converged,
        low_confidence=low_confidence,
    )


def track_rotation(
    stream: EventSlice,
    camera: CameraIntrinsics,
    config: TrackingConfig | None = None,
    *,
    threads: int = 1,
    omega0: ArrayLike | None = None,
) -> AngularVelocitySeries:
    """
    Estimate angular velocity on sliding windows of `config.window` events.

    Windows are referenced at their first event and each estimate is stamped with the
    window's mid time. With warm starting, each window starts from the previous estimate
    and windows run in order; without it, windows are independent and run on `threads`
    workers. Windows with fewer than `config.min_events` events are skipped; estimates that
    expel more than 25% of the events or gain less than 5% contrast over the identity warp
    are kept but flagged low-confidence.
    """
    settings: TrackingConfig = config if config is not None else TrackingConfig()
    settings.assert_valid()
    if omega0 is not None:
        start_values: NDArray[np.float64] = np.asarray(omega0, dtype=np.float64).reshape(3)
        settings = replace(
            settings, omega0=(float(start_values[0]), float(start_values[1]), float(start_values[2]))
        )
    windows: list[EventSlice] = [
        window
        for window in slice_events(
            stream, SliceBy.COUNT, settings.window, settings.effective_stride, ref_policy=RefTimePolicy.FIRST
        )
        if len(window) >= settings.min_events and window.duration > 0.0
    ]
    grid: GridSpec = GridSpec.for_camera(camera)
    samples: list[AngularVelocitySample] = []
    if settings.warm_start:
        previous: NDArray[np.float64] | None = None
        for index, window in enumerate(windows):
            sample: AngularVelocitySample = _estimate_window(window, camera, settings, previous, grid)
            previous = sample.omega
            samples.append(sample)
            logger.info(
                "Window {index}/{total}: t={t:.4f} s, omega={omega} rad/s, f*={f:.6g}",
                index=index + 1,
                total=len(windows),
                t=sample.t_mid,
                omega=np.round(sample.omega, 4).tolist(),
                f=sample.f_star,
            )
    else:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            samples = list(pool.map(lambda window: _estimate_window(window, camera, settings, None, grid), windows))

    flagged: int = sum(sample.low_confidence for sample in samples)
    if flagged:
        logger.warning("{flagged} of {total} windows are low-confidence", flagged=flagged, total=len(samples))
    series: AngularVelocitySeries = AngularVelocitySeries(samples)
    series.assert_valid()
    logger.info("Tracked rotation: {series}", series=series.describe())
    return series
