"""Angular-velocity error statistics."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.typing import NDArray

from event_cmax import PoseTrajectory, TrajectoryRangeError
from event_cmax.pipelines import (
    AngularErrorReport,
    AngularVelocitySample,
    AngularVelocitySeries,
    ground_truth_omega,
    rms_angular_error,
)
from event_cmax.synth import OmegaProfile

PROFILE: OmegaProfile = OmegaProfile(
    breaks=np.array([0.0, 1.0, 2.0]),
    omegas=np.array([[0.0, 0.0, 1.5], [0.5, -1.0, 0.0]]),
)


def _series(times: NDArray[np.float64], offset: NDArray[np.float64]) -> AngularVelocitySeries:
    return AngularVelocitySeries(
        [
            AngularVelocitySample(
                t_mid=float(t), omega=PROFILE.omega_at(t)[0] + offset, f_star=1.0, f_zero=0.5, n_events=100
            )
            for t in times
        ]
    )


def test_trajectory_truth_matches_the_profile() -> None:
    trajectory: PoseTrajectory = PROFILE.to_trajectory()
    times: NDArray[np.float64] = np.array([0.25, 0.5, 1.5, 1.75])
    assert ground_truth_omega(trajectory, times) == pytest.approx(PROFILE.omega_at(times), abs=1e-6)


def test_perfect_estimates_have_zero_error() -> None:
    series: AngularVelocitySeries = _series(np.linspace(0.1, 1.9, 10), np.zeros(3))
    report: AngularErrorReport = rms_angular_error(series, PROFILE.omega_at)
    assert report.rms == pytest.approx(0.0, abs=1e-12)
    assert report.relative_rms == pytest.approx(0.0, abs=1e-12)


def test_constant_offset_gives_its_magnitude_as_rms() -> None:
    series: AngularVelocitySeries = _series(np.linspace(0.1, 1.9, 10), np.array([math.radians(10.0), 0.0, 0.0]))
    report: AngularErrorReport = rms_angular_error(series, PROFILE.omega_at, subinterval=1.0)
    assert report.rms == pytest.approx(10.0)
    assert report.per_axis_rms == pytest.approx([10.0, 0.0, 0.0])
    assert report.peak_speed == pytest.approx(math.degrees(1.5))
    assert len(report.subintervals) == 2
    assert report.subintervals["median"].tolist() == pytest.approx([10.0, 10.0])
    assert report.to_dict()["samples"] == 10


def test_estimates_outside_the_trajectory_are_rejected() -> None:
    series: AngularVelocitySeries = _series(np.array([0.5, 1.5]), np.zeros(3))
    short: PoseTrajectory = OmegaProfile.constant([0.0, 0.0, 1.5], 1.0).to_trajectory()
    with pytest.raises(TrajectoryRangeError):
        rms_angular_error(series, short)


def test_empty_series_cannot_be_scored() -> None:
    with pytest.raises(ValueError, match="empty"):
        rms_angular_error(AngularVelocitySeries(), PROFILE.omega_at)
