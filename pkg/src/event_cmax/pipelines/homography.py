"""Planar-scene motion: 8-DOF homography estimation on one slice or a sliding window."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from ..iwe import IWE, ContrastObjective, GridSpec
from ..models import CameraIntrinsics, EventSlice, HomographyParams
from ..optimize import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    OptimResult,
    conjugate_gradient_ascent,
)
from ..reader import slice_events
from ..type_helpers import AccumulationMode, CGVariant, RefTimePolicy, SliceBy, SplatKind
from ..units import radians_to_degrees
from ..warps import HomographyWarp

DEFAULT_HOMOGRAPHY_WINDOW: int = 50_000
DEFAULT_HOMOGRAPHY_RTOL: float = 1e-8


@dataclass(slots=True)
class HomographyEstimate:
    """Canonical 8-DOF parameters at the optimum with the identity and corrected IWEs."""

    params: HomographyParams
    f_star: float
    f_zero: float
    result: OptimResult
    iwe_identity: IWE
    iwe_corrected: IWE
    t_ref: float = 0.0

    @property
    def theta8(self) -> NDArray[np.float64]:
        return self.params.as_vector()

    def describe(self) -> str:
        return (
            f"HomographyEstimate(omega={np.round(self.params.omega, 4).tolist()} rad/s, "
            f"v/d={np.round(self.params.v_over_d, 4).tolist()} 1/s, "
            f"n={np.round(self.params.normal, 4).tolist()}, f*={self.f_star:.6g}, f(0)={self.f_zero:.6g})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {
            "t_ref": self.t_ref,
            "params": self.params.to_dict(),
            "f_star": self.f_star,
            "f_zero": self.f_zero,
            "optimizer": self.result.to_dict(),
            "discard_fraction": self.iwe_corrected.discard_fraction,
        }


@dataclass(slots=True, frozen=True)
class HomographyError:
    """Deviation of an estimate from ground truth: relative omega and v/d errors, normal angle (deg)."""

    omega_relative: float
    v_over_d_relative: float
    normal_degrees: float

    def to_dict(self) -> dict[str, float]:
        return {
            "omega_relative": self.omega_relative,
            "v_over_d_relative": self.v_over_d_relative,
            "normal_degrees": self.normal_degrees,
        }


def _relative(estimate: NDArray[np.float64], truth: NDArray[np.float64]) -> float:
    scale: float = float(np.linalg.norm(truth))
    difference: float = float(np.linalg.norm(estimate - truth))
    return difference / scale if scale > 0.0 else difference


def homography_error(estimate: HomographyParams, truth: HomographyParams) -> HomographyError:
    """Compare canonical forms, so a flipped (n, v/d) pair counts as the same homography."""
    found: HomographyParams = estimate.canonical()
    expected: HomographyParams = truth.canonical()
    cosine: float = float(np.clip(found.normal @ expected.normal, -1.0, 1.0))
    return HomographyError(
        omega_relative=_relative(found.omega, expected.omega),
        v_over_d_relative=_relative(found.v_over_d, expected.v_over_d),
        normal_degrees=radians_to_degrees(math.acos(cosine)),
    )


def estimate_homography(
    events: EventSlice,
    camera: CameraIntrinsics,
    theta0: HomographyParams | None = None,
    *,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
    variant: CGVariant = CGVariant.POLAK_RIBIERE_PLUS,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    tol: float = DEFAULT_TOLERANCE,
    f_rtol: float = DEFAULT_HOMOGRAPHY_RTOL,
) -> HomographyEstimate:
    """
    Maximize the contrast of the sensor-frame IWE over the 8 homography parameters.

    Args:
        events: Events of one short window, referenced at `events.t_ref`.
        camera: Intrinsics of the event coordinates.
        theta0: Starting parameters; defaults to zero motion with a fronto-parallel normal.
        mode: Count or polarity accumulation.
        splat: Splat kernel.
        variant: Conjugate-gradient beta formula.
        max_iter: Iteration limit.
        tol: Gradient-norm tolerance in scaled parameter units.
        f_rtol: Relative-improvement tolerance.

    Singular homographies met during the line search evaluate to -inf, so the search shrinks
    away from them. The returned parameters are canonical (n_z <= 0).
    """
    if events.is_empty:
        raise ValueError("Homography estimation needs at least one event.")
    start: HomographyParams = theta0 if theta0 is not None else HomographyParams()
    model: HomographyWarp = HomographyWarp(camera)
    grid: GridSpec = GridSpec.for_camera(camera)
    objective: ContrastObjective = ContrastObjective(events, model, grid, mode, splat)
    result: OptimResult = conjugate_gradient_ascent(
        objective,
        start.as_vector(),
        variant=variant,
        scales=model.scales(events),
        gradient_step=model.gradient_steps(),
        max_iter=max_iter,
        tol=tol,
        f_rtol=f_rtol,
    )
    identity: NDArray[np.float64] = HomographyParams(phi=start.phi, psi=start.psi).as_vector()
    estimate: HomographyEstimate = HomographyEstimate(
        params=HomographyParams.from_vector(result.theta_star).canonical(),
        f_star=result.f_star,
        f_zero=objective(identity),
        result=result,
        iwe_identity=objective.iwe(identity),
        iwe_corrected=objective.iwe(result.theta_star),
        t_ref=events.reference_time,
    )
    logger.info("Estimated homography for {events}: {estimate}", events=events.describe(), estimate=estimate.describe())
    return estimate


@dataclass(slots=True)
class HomographySeries:
    """Per-window homography estimates in time order."""

    estimates: list[HomographyEstimate] = field(default_factory=list[HomographyEstimate])

    def __len__(self) -> int:
        return len(self.estimates)

    def to_rows(self) -> list[dict[str, Any]]:
        rows: list[dict[str, Any]] = []
        for estimate in self.estimates:
            params: HomographyParams = estimate.params
            rows.append(
                {
                    "t_ref": estimate.t_ref,
                    "wx": params.omega[0],
                    "wy": params.omega[1],
                    "wz": params.omega[2],
                    "vx_d": params.v_over_d[0],
                    "vy_d": params.v_over_d[1],
                    "vz_d": params.v_over_d[2],
                    "phi": params.phi,
                    "psi": params.psi,
                    "f": estimate.f_star,
                    "f_zero": estimate.f_zero,
                }
            )
        return rows


def track_homography(
    stream: EventSlice,
    camera: CameraIntrinsics,
    *,
    window: int = DEFAULT_HOMOGRAPHY_WINDOW,
    stride: int | None = None,
    theta0: HomographyParams | None = None,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
) -> HomographySeries:
    """Estimate the homography on consecutive windows, warm-starting each from the previous estimate.

    Each window is referenced at its first event. The plane and velocity change between
    windows, so the previous estimate is only a starting point.
    """
    previous: HomographyParams | None = theta0
    series: HomographySeries = HomographySeries()
    for part in slice_events(stream, SliceBy.COUNT, window, stride or window, ref_policy=RefTimePolicy.FIRST):
        if part.duration <= 0.0:
            continue
        estimate: HomographyEstimate = estimate_homography(
            part, camera, previous, mode=mode, splat=splat, max_iter=max_iter
        )
        series.estimates.append(estimate)
        previous = estimate.params
    logger.info("Tracked homography over {count} windows", count=len(series))
    return series
