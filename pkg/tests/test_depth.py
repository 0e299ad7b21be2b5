"""Plane-sweep depth per patch and per pixel."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.typing import NDArray

from event_cmax import EventSlice, PoseTrajectory, SynthConfig, gen_planar_scene
from event_cmax.pipelines import (
    DepthCountRun,
    DepthResult,
    SemiDenseDepthMap,
    adaptive_threshold,
    depth_for_patch,
    depth_samples,
    depth_vs_event_count,
    nan_median_filter,
    semidense_depth,
)
from event_cmax.synth import ConstantMotion, PlanarTruth, Plane

from .sample_data import SMALL_CAMERA, flow_scene

PLANE_DEPTH: float = 1.0
Z_GRID: NDArray[np.float64] = depth_samples((0.5, 2.0), 30)


@pytest.fixture(scope="module")
def sideways_scene() -> tuple[EventSlice, PlanarTruth]:
    return gen_planar_scene(
        ConstantMotion(v=np.array([2.0, 0.0, 0.0])),
        Plane.fronto_parallel(PLANE_DEPTH),
        SMALL_CAMERA,
        SynthConfig(rate=2.0, duration=0.1, seed=13),
        scene=flow_scene(),
    )


def test_depth_samples_are_log_uniform() -> None:
    samples: NDArray[np.float64] = depth_samples((0.5, 2.0), 3)
    assert samples == pytest.approx([0.5, 1.0, 2.0])
    with pytest.raises(ValueError, match="near < far"):
        depth_samples((1.0, 0.5), 10)
    with pytest.raises(ValueError, match="at least 2"):
        depth_samples((0.5, 1.0), 1)


def test_patch_depth_peaks_at_the_plane(sideways_scene: tuple[EventSlice, PlanarTruth]) -> None:
    events, truth = sideways_scene
    result: DepthResult = depth_for_patch(events, truth.trajectory, SMALL_CAMERA, patch_size=31)
    assert result.z_refined == pytest.approx(PLANE_DEPTH, rel=0.05)
    assert result.f_refined >= result.f_star
    assert result.contrasts[0] < result.f_star
    assert result.contrasts[-1] < result.f_star
    assert list(result.to_frame().columns) == ["z", "f"]
    assert result.to_dict()["center"] == [32, 24]


def test_truth_reports_the_plane_depth(sideways_scene: tuple[EventSlice, PlanarTruth]) -> None:
    _, truth = sideways_scene
    assert truth.depth_at(0.05) == pytest.approx(PLANE_DEPTH)
    assert truth.to_dict()["reference_depth"] == pytest.approx(PLANE_DEPTH)


def test_semidense_depth_selects_edge_pixels_near_the_plane(sideways_scene: tuple[EventSlice, PlanarTruth]) -> None:
    events, truth = sideways_scene
    depth_map: SemiDenseDepthMap = semidense_depth(events, truth.trajectory, SMALL_CAMERA, z_grid=Z_GRID, threads=2)
    assert depth_map.depth.shape == (48, 64)
    assert depth_map.selected > 0
    assert float(np.median(depth_map.depth[depth_map.mask])) == pytest.approx(PLANE_DEPTH, rel=0.1)
    assert np.all(np.isnan(depth_map.depth[~depth_map.mask]))
    assert depth_map.to_dict()["z_steps"] == 30


def test_semidense_depth_of_an_empty_slice_selects_nothing() -> None:
    trajectory: PoseTrajectory = ConstantMotion(v=np.array([1.0, 0.0, 0.0])).to_trajectory(0.1)
    depth_map: SemiDenseDepthMap = semidense_depth(EventSlice(), trajectory, SMALL_CAMERA, z_grid=Z_GRID)
    assert depth_map.selected == 0
    assert math.isnan(depth_map.rms_error(1.0))
    assert depth_map.to_dict()["depth_median"] is None


def test_depth_against_event_count_clamps_large_counts(sideways_scene: tuple[EventSlice, PlanarTruth]) -> None:
    events, truth = sideways_scene
    runs: list[DepthCountRun] = depth_vs_event_count(
        events, truth.trajectory, SMALL_CAMERA, [0, len(events) + 1000], truth=PLANE_DEPTH, z_grid=Z_GRID
    )
    assert [run.count for run in runs] == [0, len(events)]
    assert runs[0].depth_map.selected == 0
    assert math.isnan(runs[0].rms)
    assert math.isfinite(runs[1].rms)
    assert runs[1].depth_map.fraction_within(PLANE_DEPTH, 0.1) > 0.5


def test_adaptive_threshold_keeps_local_peaks() -> None:
    values: NDArray[np.float64] = np.zeros((9, 9))
    values[4, 4] = 5.0
    values[1, 1] = 0.5
    mask: NDArray[np.bool_] = adaptive_threshold(values, block_size=3)
    assert mask[4, 4]
    assert mask[1, 1]
    assert not mask[0, 0]
    assert not adaptive_threshold(values, block_size=3, offset=1.0)[1, 1]


def test_median_filter_ignores_missing_depths() -> None:
    values: NDArray[np.float64] = np.full((3, 3), np.nan)
    values[0, 0] = 1.0
    values[0, 1] = 2.0
    values[1, 1] = 9.0
    filtered: NDArray[np.float64] = nan_median_filter(values, 3)
    assert filtered[1, 1] == pytest.approx(2.0)
    assert filtered[2, 2] == pytest.approx(9.0)
    assert filtered[0, 0] == pytest.approx(2.0)
