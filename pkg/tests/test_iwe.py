"""Accumulation, contrast and the bookkeeping of the image of warped events."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.typing import NDArray

from event_cmax import (
    IWE,
    AccumulationMode,
    ContrastObjective,
    EventSlice,
    FlowWarp,
    GridSpec,
    SplatKind,
    accumulate,
    contrast,
)
from event_cmax.iwe import (
    PATCH_WEIGHTS,
    accumulate_points,
    gaussian_splat_kernel,
    histogram,
    objective,
    patch_contrast_map,
    weighted_patch_contrast,
)

from .sample_data import flow_events, tiny_slice

ORACLE_GRID: GridSpec = GridSpec(width=16, height=16)


def _oracle_events(count: int = 100, seed: int = 11) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    rng: np.random.Generator = np.random.default_rng(seed)
    points: NDArray[np.float64] = rng.uniform(-2.0, 17.0, (count, 2))
    weights: NDArray[np.float64] = rng.choice([-1.0, 1.0], count)
    return points, weights


def _brute_force(points: NDArray[np.float64], weights: NDArray[np.float64], splat: SplatKind) -> NDArray[np.float64]:
    image: NDArray[np.float64] = np.zeros((ORACLE_GRID.height, ORACLE_GRID.width))
    for (x, y), b in zip(points.tolist(), weights.tolist()):
        if not (-0.5 <= x < ORACLE_GRID.width - 0.5 and -0.5 <= y < ORACLE_GRID.height - 0.5):
            continue
        if splat is SplatKind.NEAREST:
            image[math.floor(y + 0.5), math.floor(x + 0.5)] += b
            continue
        left, top = math.floor(x), math.floor(y)
        for column, row in ((left, top), (left + 1, top), (left, top + 1), (left + 1, top + 1)):
            if 0 <= column < ORACLE_GRID.width and 0 <= row < ORACLE_GRID.height:
                image[row, column] += b * (1.0 - abs(x - column)) * (1.0 - abs(y - row))
    return image


@pytest.mark.parametrize("splat", [SplatKind.NEAREST, SplatKind.BILINEAR])
def test_accumulation_matches_a_brute_force_loop(splat: SplatKind) -> None:
    points, weights = _oracle_events()
    iwe: IWE = accumulate_points(points, weights, ORACLE_GRID, splat, mode=AccumulationMode.POLARITY)
    assert iwe.values == pytest.approx(_brute_force(points, weights, splat), abs=1e-12)


@pytest.mark.parametrize("splat", [SplatKind.NEAREST, SplatKind.BILINEAR, SplatKind.GAUSSIAN])
def test_mass_is_conserved_including_the_discarded_part(splat: SplatKind) -> None:
    points, weights = _oracle_events(count=400, seed=5)
    iwe: IWE = accumulate_points(points, weights, ORACLE_GRID, splat, mode=AccumulationMode.POLARITY)
    assert iwe.total + iwe.discarded_mass == pytest.approx(weights.sum(), abs=1e-9)
    assert iwe.n_events == 400
    assert 0 < iwe.n_discarded < 400


def test_bilinear_deposit_of_a_single_event() -> None:
    iwe: IWE = accumulate_points([[3.25, 5.5]], [1.0], ORACLE_GRID, SplatKind.BILINEAR)
    assert iwe.values[5, 3] == pytest.approx(0.375)
    assert iwe.values[5, 4] == pytest.approx(0.125)
    assert iwe.values[6, 3] == pytest.approx(0.375)
    assert iwe.values[6, 4] == pytest.approx(0.125)
    assert iwe.total == pytest.approx(1.0)


def test_pixel_centre_convention_at_the_borders() -> None:
    iwe: IWE = accumulate_points([[-0.5, 0.0], [15.5, 0.0], [-0.51, 3.0]], [1.0, 1.0, 1.0], ORACLE_GRID, SplatKind.NEAREST)
    assert iwe.values[0, 0] == 1.0
    assert iwe.n_discarded == 2
    assert iwe.discarded_mass == pytest.approx(2.0)


def test_events_behind_the_camera_are_discarded() -> None:
    iwe: IWE = accumulate_points([[4.0, 4.0], [5.0, 5.0]], [1.0, 1.0], ORACLE_GRID, SplatKind.NEAREST, valid=[True, False])
    assert iwe.total == 1.0
    assert iwe.n_discarded == 1


def test_chunking_does_not_change_the_image() -> None:
    points, weights = _oracle_events(count=300, seed=9)
    whole: IWE = accumulate_points(points, weights, ORACLE_GRID, SplatKind.GAUSSIAN)
    chunked: IWE = accumulate_points(points, weights, ORACLE_GRID, SplatKind.GAUSSIAN, chunk_size=7)
    assert chunked.values == pytest.approx(whole.values, abs=1e-12)
    assert chunked.discarded_mass == pytest.approx(whole.discarded_mass)


def test_gaussian_splat_of_a_centred_event_matches_the_kernel_shape() -> None:
    iwe: IWE = accumulate_points([[8.0, 8.0]], [1.0], ORACLE_GRID, SplatKind.GAUSSIAN, epsilon=1.0)
    assert iwe.total == pytest.approx(1.0)
    assert float(iwe.values.max()) == pytest.approx(iwe.values[8, 8])
    assert iwe.values[8, 7] == pytest.approx(iwe.values[7, 8])


def test_gaussian_kernel_is_normalized_and_needs_room() -> None:
    kernel: NDArray[np.float64] = gaussian_splat_kernel(1.0)
    assert kernel.sum() == pytest.approx(1.0)
    assert kernel.shape == (7, 7)
    with pytest.raises(ValueError, match="at least 2 \\* epsilon"):
        gaussian_splat_kernel(1.0, radius=1.5)


def test_contrast_is_the_population_variance_with_zeros() -> None:
    values: NDArray[np.float64] = np.zeros((4, 4))
    values[1, 1] = 4.0
    iwe: IWE = IWE(values=values, grid=GridSpec(width=4, height=4))
    result = contrast(iwe)
    assert result.mean == pytest.approx(0.25)
    assert result.f == pytest.approx(16.0 / 16.0 - 0.25**2)


def test_contrast_of_a_uniform_image_is_zero() -> None:
    iwe: IWE = IWE(values=np.full((5, 6), 3.0), grid=GridSpec(width=6, height=5))
    assert contrast(iwe).f == 0.0


def test_correct_flow_sharpens_the_image() -> None:
    events: EventSlice = flow_events((-40.0, 0.0))
    grid: GridSpec = GridSpec(width=64, height=48)
    sharp: float = objective(events, FlowWarp(), [-40.0, 0.0], grid)
    blurred: float = objective(events, FlowWarp(), [0.0, 0.0], grid)
    wrong: float = objective(events, FlowWarp(), [40.0, 0.0], grid)
    assert sharp > blurred > wrong


def test_polarity_and_count_modes_agree_when_all_polarities_are_positive() -> None:
    events: EventSlice = EventSlice(t=[0.0, 0.01, 0.02], x=[3.0, 4.0, 5.0], y=[3.0, 3.0, 3.0], p=[1, 1, 1])
    grid: GridSpec = GridSpec(width=8, height=8)
    count: IWE = accumulate(events, FlowWarp(), [0.0, 0.0], grid, AccumulationMode.COUNT)
    polarity: IWE = accumulate(events, FlowWarp(), [0.0, 0.0], grid, AccumulationMode.POLARITY)
    assert count.values == pytest.approx(polarity.values)


def test_empty_slices_give_an_empty_image() -> None:
    iwe: IWE = accumulate(EventSlice(), FlowWarp(), [0.0, 0.0], ORACLE_GRID)
    assert iwe.total == 0.0
    assert contrast(iwe).f == 0.0


def test_grid_around_events_keeps_a_margin() -> None:
    grid: GridSpec = GridSpec.for_events(tiny_slice(6), margin=5)
    assert (grid.x0, grid.y0) == (-3.0, -2.0)
    assert (grid.width, grid.height) == (16, 14)
    with pytest.raises(ValueError, match="empty"):
        GridSpec.for_events(EventSlice())


def test_patch_contrast_map_matches_the_single_patch_variance() -> None:
    rng: np.random.Generator = np.random.default_rng(2)
    values: NDArray[np.float64] = rng.poisson(2.0, (12, 10)).astype(np.float64)
    iwe: IWE = IWE(values=values, grid=GridSpec(width=10, height=12))
    contrast_map: NDArray[np.float64] = patch_contrast_map(values)
    assert contrast_map[5, 4] == pytest.approx(weighted_patch_contrast(iwe, (4, 5)))
    assert contrast_map[0, :].tolist() == [0.0] * 10
    assert PATCH_WEIGHTS[1, 1] == 1.0
    with pytest.raises(ValueError, match="too close to the border"):
        weighted_patch_contrast(iwe, (0, 5))


def test_histogram_counts_zero_pixels() -> None:
    values: NDArray[np.float64] = np.array([[0.0, 0.0, 1.0], [2.0, 3.0, 0.0]])
    summary = histogram(IWE(values=values, grid=GridSpec(width=3, height=2)), bins=3)
    assert summary.zero_count == 3
    assert int(summary.counts.sum()) == 6


def test_objective_counts_evaluations() -> None:
    events: EventSlice = flow_events((-20.0, 10.0))
    evaluate: ContrastObjective = ContrastObjective(events, FlowWarp(), GridSpec(width=64, height=48))
    evaluate([0.0, 0.0])
    evaluate([1.0, 0.0])
    assert evaluate.evaluations == 2
    assert evaluate.iwe([0.0, 0.0]).n_events == len(events)
