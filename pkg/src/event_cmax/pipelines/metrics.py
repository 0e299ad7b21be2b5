"""Angular-velocity error statistics against ground truth."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import NDArray

from ..models import PoseTrajectory
from ..units import rad_per_s_to_deg_per_s
from .rotation import AngularVelocitySeries

DEFAULT_SUBINTERVAL: float = 15.0

OmegaFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def ground_truth_omega(truth: PoseTrajectory | OmegaFunction, times: NDArray[np.float64]) -> NDArray[np.float64]:
    """Warp angular velocity (rad/s, (N, 3)) at `times`.

    For a camera-to-world trajectory this is the negated body rate from central differences
    of the interpolated rotations; a callable is evaluated directly.
    """
    if isinstance(truth, PoseTrajectory):
        return -truth.angular_velocity(times)
    return np.asarray(truth(times), dtype=np.float64).reshape(-1, 3)


@dataclass(slots=True)
class AngularErrorReport:
    """RMS angular-velocity error (deg/s) overall, per axis and per subinterval."""

    rms: float
    per_axis_rms: NDArray[np.float64]
    errors: pd.DataFrame
    subintervals: pd.DataFrame
    peak_speed: float

    @property
    def relative_rms(self) -> float:
        """RMS error as a fraction of the peak ground-truth speed."""
        return self.rms / self.peak_speed if self.peak_speed > 0.0 else math.inf

    def describe(self) -> str:
        return (
            f"AngularErrorReport(rms={self.rms:.3f} deg/s, peak={self.peak_speed:.1f} deg/s, "
            f"relative={self.relative_rms:.2%})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {
            "rms_deg_s": self.rms,
            "per_axis_rms_deg_s": self.per_axis_rms.tolist(),
            "peak_speed_deg_s": self.peak_speed,
            "relative_rms": self.relative_rms,
            "samples": int(len(self.errors)),
        }


def _subinterval_statistics(errors: pd.DataFrame, length: float) -> pd.DataFrame:
    """Boxplot statistics of the error norm in consecutive subintervals of `length` seconds."""
    if errors.empty:
        return pd.DataFrame(columns=["start", "end", "count", "min", "q1", "median", "q3", "max", "rms"])
    start: float = float(errors["t"].iloc[0])
    labelled: pd.DataFrame = errors.assign(interval=np.floor((errors["t"] - start) / length).astype(int))
    grouped = labelled.groupby("interval")["error"]
    table: pd.DataFrame = pd.DataFrame(
        {
            "count": grouped.count(),
            "min": grouped.min(),
            "q1": grouped.quantile(0.25),
            "median": grouped.median(),
            "q3": grouped.quantile(0.75),
            "max": grouped.max(),
            "rms": grouped.apply(lambda values: float(np.sqrt(np.mean(np.square(values))))),
        }
    )
    table.insert(0, "start", start + table.index.to_numpy(dtype=np.float64) * length)
    table.insert(1, "end", table["start"] + length)
    return table.reset_index(drop=True)


def rms_angular_error(
    series: AngularVelocitySeries,
    truth: PoseTrajectory | OmegaFunction,
    *,
    subinterval: float = DEFAULT_SUBINTERVAL,
) -> AngularErrorReport:
    """
    Compare estimated angular velocities with ground truth at the window mid times.

    Args:
        series: Estimates from `track_rotation`.
        truth: Camera-to-world trajectory or an analytic warp angular velocity omega(t) in rad/s.
        subinterval: Length (s) of the subintervals used for boxplot statistics.

    Raises:
        TrajectoryRangeError: When an estimate lies outside the ground-truth trajectory.
        ValueError: When the series is empty.
    """
    if len(series) == 0:
        raise ValueError("Cannot evaluate an empty angular-velocity series.")
    times: NDArray[np.float64] = series.times
    expected: NDArray[np.float64] = rad_per_s_to_deg_per_s(ground_truth_omega(truth, times))
    estimated: NDArray[np.float64] = rad_per_s_to_deg_per_s(series.omegas)
    difference: NDArray[np.float64] = estimated - expected
    norms: NDArray[np.float64] = np.linalg.norm(difference, axis=1)
    errors: pd.DataFrame = pd.DataFrame(
        {
            "t": times,
            "error_x": difference[:, 0],
            "error_y": difference[:, 1],
            "error_z": difference[:, 2],
            "error": norms,
        }
    )
    report: AngularErrorReport = AngularErrorReport(
        rms=float(np.sqrt(np.mean(np.square(norms)))),
        per_axis_rms=np.sqrt(np.mean(np.square(difference), axis=0)),
        errors=errors,
        subintervals=_subinterval_statistics(errors, subinterval),
        peak_speed=float(np.linalg.norm(expected, axis=1).max()),
    )
    logger.info("Angular-velocity error: {report}", report=report.describe())
    return report
