"""Sliding-window angular-velocity tracking."""

from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from numpy.typing import NDArray

from event_cmax import EventSlice, SearchGrid, SynthConfig, ValidationError, gen_rotation_scene
from event_cmax.pipelines import AngularVelocitySample, AngularVelocitySeries, TrackingConfig, track_rotation
from event_cmax.synth import RotationTruth

from .sample_data import ROTATION_CAMERA

OMEGA: NDArray[np.float64] = np.array([0.4, -0.6, 2.0])


@pytest.fixture(scope="module")
def rotating_stream() -> tuple[EventSlice, RotationTruth]:
    return gen_rotation_scene(OMEGA, ROTATION_CAMERA, SynthConfig(rate=2.0, duration=0.2, seed=21))


def test_tracking_config_defaults_to_half_window_stride() -> None:
    config: TrackingConfig = TrackingConfig(window=3000)
    assert config.effective_stride == 1500
    assert TrackingConfig(window=3000, stride=1000).effective_stride == 1000
    assert config.to_dict()["stride"] == 1500


def test_tracking_config_validation() -> None:
    errors: list[str] = TrackingConfig(window=0, stride=-1).validate()
    assert len(errors) == 2
    with pytest.raises(ValidationError, match="three-dimensional"):
        TrackingConfig(initial_search=SearchGrid.symmetric([1.0, 1.0], [3, 3])).assert_valid()


def test_tracking_recovers_a_constant_angular_velocity(rotating_stream: tuple[EventSlice, RotationTruth]) -> None:
    events, truth = rotating_stream
    config: TrackingConfig = TrackingConfig(window=max(200, len(events) // 4), omega0=(0.3, -0.5, 1.8))
    series: AngularVelocitySeries = track_rotation(events, ROTATION_CAMERA, config)
    assert len(series) >= 3
    speed: float = float(np.linalg.norm(OMEGA))
    errors: NDArray[np.float64] = np.linalg.norm(series.omegas - truth.omega_at(series.times), axis=1)
    assert float(np.median(errors)) < 0.05 * speed
    assert np.all(np.diff(series.times) > 0.0)
    assert all(sample.f_star >= sample.f_zero for sample in series.samples)


def test_cold_windows_run_in_parallel_deterministically(rotating_stream: tuple[EventSlice, RotationTruth]) -> None:
    events, _ = rotating_stream
    config: TrackingConfig = TrackingConfig(
        window=max(200, len(events) // 3), warm_start=False, omega0=(0.3, -0.5, 1.8), max_iter=10
    )
    serial: AngularVelocitySeries = track_rotation(events, ROTATION_CAMERA, config, threads=1)
    pooled: AngularVelocitySeries = track_rotation(events, ROTATION_CAMERA, config, threads=3)
    assert np.array_equal(serial.omegas, pooled.omegas)
    assert np.array_equal(serial.times, pooled.times)


def test_empty_and_instantaneous_streams_give_no_estimates() -> None:
    assert len(track_rotation(EventSlice(), ROTATION_CAMERA, TrackingConfig(window=50))) == 0
    count: int = 300
    burst: EventSlice = EventSlice(
        t=np.zeros(count),
        x=np.linspace(5.0, 90.0, count),
        y=np.full(count, 30.0),
        p=np.ones(count, dtype=np.int8),
    )
    assert len(track_rotation(burst, ROTATION_CAMERA, TrackingConfig(window=150))) == 0


def test_short_windows_are_skipped() -> None:
    count: int = 120
    events: EventSlice = EventSlice(
        t=np.linspace(0.0, 0.01, count),
        x=np.linspace(5.0, 90.0, count),
        y=np.full(count, 30.0),
        p=np.ones(count, dtype=np.int8),
    )
    assert len(track_rotation(events, ROTATION_CAMERA, TrackingConfig(window=80, min_events=100))) == 0


def _sample(t_mid: float, omega: list[float], *, low: bool = False) -> AngularVelocitySample:
    return AngularVelocitySample(
        t_mid=t_mid, omega=np.array(omega), f_star=2.0, f_zero=1.0, n_events=500, low_confidence=low
    )


def test_series_frame_and_confidence_filter() -> None:
    series: AngularVelocitySeries = AngularVelocitySeries(
        [_sample(0.01, [0.0, 0.0, 1.0]), _sample(0.02, [0.0, 0.0, 1.1], low=True), _sample(0.03, [0.1, 0.0, 1.2])]
    )
    frame: pd.DataFrame = series.to_frame()
    assert list(frame.columns[:6]) == ["t", "wx", "wy", "wz", "f", "n_events"]
    assert frame["wz"].tolist() == pytest.approx([1.0, 1.1, 1.2])
    assert len(series.confident()) == 2
    assert "low_confidence=1" in series.describe()


def test_series_needs_increasing_times() -> None:
    series: AngularVelocitySeries = AngularVelocitySeries([_sample(0.02, [0.0, 0.0, 1.0]), _sample(0.01, [0.0, 0.0, 1.0])])
    assert series.validate() == ["Sample mid times must be strictly increasing."]


def test_reversed_events_give_the_negated_angular_velocity(rotating_stream: tuple[EventSlice, RotationTruth]) -> None:
    stream, _ = rotating_stream
    window: int = max(200, len(stream) // 4)
    events: EventSlice = stream.prefix(window)
    forward: AngularVelocitySeries = track_rotation(
        events, ROTATION_CAMERA, TrackingConfig(window=window, stride=window, omega0=(0.3, -0.5, 1.8))
    )
    backward: AngularVelocitySeries = track_rotation(
        events.time_reversed(), ROTATION_CAMERA, TrackingConfig(window=window, stride=window, omega0=(-0.3, 0.5, -1.8))
    )
    assert len(forward) == len(backward) == 1
    speed: float = float(np.linalg.norm(OMEGA))
    assert float(np.linalg.norm(backward.omegas[0] + forward.omegas[0])) < 0.05 * speed
