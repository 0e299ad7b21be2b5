"""Planar-scene homography estimation and its error measures."""

from __future__ import annotations

import math

import numpy as np
import pytest

from event_cmax import EventSlice, HomographyParams, SynthConfig, estimate_homography, gen_planar_scene, track_homography
from event_cmax.pipelines import HomographyError, HomographyEstimate, HomographySeries, homography_error
from event_cmax.synth import ConstantMotion, PlanarTruth, Plane

from .sample_data import SMALL_CAMERA, flow_scene


@pytest.fixture(scope="module")
def planar_scene() -> tuple[EventSlice, PlanarTruth]:
    motion: ConstantMotion = ConstantMotion(omega=np.array([0.0, 0.0, 1.0]), v=np.array([0.8, 0.0, 0.0]))
    return gen_planar_scene(
        motion, Plane.fronto_parallel(1.0), SMALL_CAMERA, SynthConfig(rate=2.0, duration=0.1, seed=5), scene=flow_scene()
    )


def test_error_of_a_flipped_pair_is_zero() -> None:
    truth: HomographyParams = HomographyParams.from_normal([0.1, 0.2, 1.0], [0.5, 0.0, 0.1], [0.0, 0.0, -1.0])
    flipped: HomographyParams = HomographyParams.from_normal([0.1, 0.2, 1.0], [-0.5, 0.0, -0.1], [0.0, 0.0, 1.0])
    error: HomographyError = homography_error(flipped, truth)
    assert error.omega_relative == pytest.approx(0.0, abs=1e-12)
    assert error.v_over_d_relative == pytest.approx(0.0, abs=1e-9)
    assert error.normal_degrees == pytest.approx(0.0, abs=1e-5)


def test_error_measures_each_component() -> None:
    truth: HomographyParams = HomographyParams.from_normal([0.0, 0.0, 2.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0])
    tilted: HomographyParams = HomographyParams.from_normal(
        [0.0, 0.0, 2.2], [1.0, 0.0, 0.0], [math.sin(math.radians(3.0)), 0.0, -math.cos(math.radians(3.0))]
    )
    error: HomographyError = homography_error(tilted, truth)
    assert error.omega_relative == pytest.approx(0.1)
    assert error.v_over_d_relative == pytest.approx(0.0, abs=1e-12)
    assert error.normal_degrees == pytest.approx(3.0, abs=1e-5)
    assert set(error.to_dict()) == {"omega_relative", "v_over_d_relative", "normal_degrees"}


def test_estimate_sharpens_the_planar_scene(planar_scene: tuple[EventSlice, PlanarTruth]) -> None:
    events, truth = planar_scene
    expected: HomographyParams = truth.homography_at(events.reference_time)
    start: HomographyParams = HomographyParams.from_normal(
        expected.omega * 0.9, expected.v_over_d * 0.9, [0.05, 0.0, -1.0]
    )
    estimate: HomographyEstimate = estimate_homography(events, SMALL_CAMERA, start, max_iter=60)
    error: HomographyError = homography_error(estimate.params, expected)
    assert estimate.f_star > estimate.f_zero
    assert error.omega_relative < 0.1
    assert error.v_over_d_relative < 0.2
    assert estimate.params.normal[2] <= 0.0
    assert estimate.theta8.shape == (8,)
    assert estimate.to_dict()["params"]["omega"] == pytest.approx(estimate.params.omega.tolist())


def test_estimate_needs_events() -> None:
    with pytest.raises(ValueError, match="at least one event"):
        estimate_homography(EventSlice(), SMALL_CAMERA)


def test_tracking_warm_starts_each_window(planar_scene: tuple[EventSlice, PlanarTruth]) -> None:
    events, truth = planar_scene
    window: int = len(events) // 2
    series: HomographySeries = track_homography(
        events, SMALL_CAMERA, window=window, theta0=truth.homography_at(0.0), max_iter=5
    )
    assert len(series) == 2
    rows: list[dict[str, object]] = series.to_rows()
    assert rows[0]["t_ref"] == pytest.approx(float(events.t[0]))
    assert rows[1]["t_ref"] == pytest.approx(float(events.t[window]))
    assert {"wx", "wy", "wz", "vx_d", "vy_d", "vz_d", "phi", "psi", "f", "f_zero"} <= set(rows[0])


def test_reversed_events_give_the_negated_motion(planar_scene: tuple[EventSlice, PlanarTruth]) -> None:
    events, truth = planar_scene
    expected: HomographyParams = truth.homography_at(events.reference_time)
    negated: HomographyParams = HomographyParams.from_normal(-expected.omega, -expected.v_over_d, expected.normal)
    start: HomographyParams = HomographyParams.from_normal(
        negated.omega * 0.9, negated.v_over_d * 0.9, [0.05, 0.0, -1.0]
    )
    estimate: HomographyEstimate = estimate_homography(events.time_reversed(), SMALL_CAMERA, start, max_iter=60)
    error: HomographyError = homography_error(estimate.params, negated)
    assert estimate.f_star > estimate.f_zero
    assert error.omega_relative < 0.1
    assert error.v_over_d_relative < 0.2
