"""Patch optical flow and the count/polarity landscape comparison."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.typing import NDArray

from event_cmax import AccumulationMode, EventSlice, SearchGrid
from event_cmax.optimize import Heatmap
from event_cmax.pipelines import (
    FlowEstimate,
    PolarityComparison,
    compare_polarity_modes,
    default_flow_search,
    estimate_flow_patch,
    half_maximum_basin,
)

from .sample_data import flow_events

SEARCH: SearchGrid = SearchGrid.symmetric([60.0, 60.0], [13, 13])


def _static_edge(count: int = 400, seed: int = 0) -> EventSlice:
    rng: np.random.Generator = np.random.default_rng(seed)
    return EventSlice(
        t=np.sort(rng.uniform(0.0, 0.1, count)),
        x=np.full(count, 20.0),
        y=np.round(rng.uniform(5.0, 35.0, count)),
        p=np.ones(count, dtype=np.int8),
    )


def test_default_search_covers_eighty_pixels_per_second() -> None:
    search: SearchGrid = default_flow_search()
    assert search.lower == [-80.0, -80.0]
    assert search.steps == [41, 41]
    assert search.cell == pytest.approx([4.0, 4.0])


def test_flow_estimate_recovers_the_edge_velocity() -> None:
    estimate: FlowEstimate = estimate_flow_patch(flow_events((-40.0, 0.0)), SEARCH)
    assert np.all(np.abs(estimate.v_grid - np.array([-40.0, 0.0])) <= SEARCH.cell)
    assert estimate.v_star.v == pytest.approx([-40.0, 0.0], abs=3.0)
    assert estimate.f_star > estimate.f_zero
    assert estimate.refined is not None
    assert estimate.evaluations == SEARCH.size + estimate.refined.evaluations


def test_flow_estimate_without_refinement_stays_on_the_lattice() -> None:
    estimate: FlowEstimate = estimate_flow_patch(flow_events((20.0, -30.0)), SEARCH, refine=False)
    assert estimate.refined is None
    assert estimate.v_star.v.tolist() == estimate.v_grid.tolist()
    assert estimate.v_grid == pytest.approx([20.0, -30.0], abs=10.0)
    assert estimate.heatmap is not None
    assert estimate.heatmap.values.shape == (13, 13)


def test_static_edge_prefers_zero_velocity() -> None:
    estimate: FlowEstimate = estimate_flow_patch(_static_edge(), SEARCH, refine=False)
    assert estimate.v_star.v.tolist() == [0.0, 0.0]
    assert estimate.f_star == pytest.approx(estimate.f_zero)


def test_sharpened_image_keeps_every_event() -> None:
    estimate: FlowEstimate = estimate_flow_patch(flow_events((-40.0, 0.0)), SEARCH, refine=False)
    assert estimate.iwe_star.n_events == estimate.iwe_zero.n_events
    assert estimate.iwe_star.total + estimate.iwe_star.discarded_mass == pytest.approx(float(estimate.iwe_zero.n_events))
    assert estimate.to_dict()["mode"] == "count"


def test_empty_patch_is_rejected() -> None:
    with pytest.raises(ValueError, match="at least one event"):
        estimate_flow_patch(EventSlice(), SEARCH)


def test_threads_do_not_change_the_estimate() -> None:
    events: EventSlice = flow_events((-40.0, 10.0))
    serial: FlowEstimate = estimate_flow_patch(events, SEARCH, refine=False, threads=1)
    pooled: FlowEstimate = estimate_flow_patch(events, SEARCH, refine=False, threads=3)
    assert serial.heatmap is not None and pooled.heatmap is not None
    assert np.array_equal(serial.heatmap.values, pooled.heatmap.values)


def test_half_maximum_basin_is_the_superlevel_set_at_half_the_peak() -> None:
    values: NDArray[np.float64] = np.array(
        [
            [0.0, 0.0, 0.0, 0.0, 9.0],
            [0.0, 6.0, 8.0, 0.0, 0.0],
            [0.0, 7.0, 10.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
        ]
    )
    heatmap: Heatmap = Heatmap(grid=SearchGrid(lower=[0.0, 0.0], upper=[3.0, 4.0], steps=[4, 5]), values=values)
    basin: NDArray[np.bool_] = half_maximum_basin(heatmap)
    expected: NDArray[np.bool_] = values >= 5.0
    assert np.array_equal(basin, expected)
    assert basin.sum() == 5
    assert basin[0, 4]


def test_half_maximum_basin_ignores_non_finite_cells() -> None:
    values: NDArray[np.float64] = np.array([[4.0, -np.inf], [np.nan, 1.0]])
    heatmap: Heatmap = Heatmap(grid=SearchGrid(lower=[0.0, 0.0], upper=[1.0, 1.0], steps=[2, 2]), values=values)
    assert np.array_equal(half_maximum_basin(heatmap), [[True, False], [False, False]])


def test_count_and_polarity_modes_agree_on_the_edge() -> None:
    comparison: PolarityComparison = compare_polarity_modes(flow_events((-40.0, 0.0)), SEARCH)
    assert comparison.argmax_cells_apart() <= 1
    assert comparison.count.mode is AccumulationMode.COUNT
    assert comparison.polarity.mode is AccumulationMode.POLARITY
    report: dict[str, object] = comparison.to_dict()
    assert report["basin_width_count"] == comparison.basin_width_count
    assert comparison.basin_width_polarity > 0.0
    assert comparison.cell_area == pytest.approx(100.0)


def test_reversed_events_give_the_negated_velocity() -> None:
    events: EventSlice = flow_events((-40.0, 10.0))
    forward: FlowEstimate = estimate_flow_patch(events, SEARCH)
    backward: FlowEstimate = estimate_flow_patch(events.time_reversed(), SEARCH)
    assert np.all(np.abs(backward.v_grid + forward.v_grid) <= SEARCH.cell)
    assert backward.v_star.v == pytest.approx(-forward.v_star.v, abs=3.0)
