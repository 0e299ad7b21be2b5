"""Patch optical flow by contrast maximization, and the count/polarity comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from ..iwe import IWE, ContrastObjective, GridSpec, accumulate
from ..models import EventSlice, FlowParams
from ..optimize import (
    DEFAULT_GRID_BUDGET,
    Heatmap,
    OptimResult,
    SearchGrid,
    conjugate_gradient_ascent,
    grid_search,
)
from ..type_helpers import AccumulationMode, SplatKind
from ..warps import FlowWarp

DEFAULT_FLOW_HALF_WIDTH: float = 80.0
DEFAULT_FLOW_STEPS: int = 41
DEFAULT_REFINE_ITERATIONS: int = 60
DEFAULT_REFINE_RTOL: float = 1e-7


def default_flow_search() -> SearchGrid:
    """[-80, 80]^2 px/s sampled 41 x 41 (4 px/s cells)."""
    return SearchGrid.symmetric([DEFAULT_FLOW_HALF_WIDTH] * 2, [DEFAULT_FLOW_STEPS] * 2)


@dataclass(slots=True)
class FlowEstimate:
    """Result of `estimate_flow_patch`.

    `f_star` and `f_zero` are measured with the objective that produced `v_star` (the
    refinement splat when refinement ran), so they are directly comparable.
    """

    v_star: FlowParams
    f_star: float
    f_zero: float
    coarse: OptimResult
    heatmap: Heatmap | None
    refined: OptimResult | None
    grid: GridSpec
    iwe_zero: IWE
    iwe_grid: IWE
    iwe_star: IWE
    mode: AccumulationMode

    @property
    def v_grid(self) -> NDArray[np.float64]:
        return np.array(self.coarse.theta_star)

    @property
    def evaluations(self) -> int:
        return self.coarse.evaluations + (self.refined.evaluations if self.refined is not None else 0)

    def describe(self) -> str:
        return (
            f"FlowEstimate(v*={np.round(self.v_star.v, 3).tolist()} px/s, f*={self.f_star:.6g}, "
            f"f(0)={self.f_zero:.6g}, mode={self.mode.value})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {
            "v_star": self.v_star.v.tolist(),
            "v_grid": self.v_grid.tolist(),
            "f_star": self.f_star,
            "f_zero": self.f_zero,
            "mode": self.mode.value,
            "evaluations": self.evaluations,
            "coarse": self.coarse.to_dict(),
            "refined": self.refined.to_dict() if self.refined is not None else None,
            "grid": self.grid.to_dict(),
            "discard_fraction": self.iwe_star.discard_fraction,
        }


def estimate_flow_patch(
    events: EventSlice,
    search: SearchGrid | None = None,
    *,
    refine: bool = True,
    mode: AccumulationMode = AccumulationMode.COUNT,
    splat: SplatKind = SplatKind.BILINEAR,
    refine_splat: SplatKind = SplatKind.GAUSSIAN,
    grid: GridSpec | None = None,
    threads: int = 1,
    budget: int = DEFAULT_GRID_BUDGET,
    max_iter: int = DEFAULT_REFINE_ITERATIONS,
) -> FlowEstimate:
    """
    Estimate the constant image velocity of a patch of events.

    Grid search over `search` (default [-80, 80]^2 px/s at 41 x 41) seeds a conjugate
    gradient refinement on the smoother `refine_splat` objective.

    Args:
        events: Events of one patch and time window.
        search: Velocity lattice for the coarse search.
        refine: Run the conjugate-gradient refinement from the grid argmax.
        mode: Count or polarity accumulation.
        splat: Splat used by the grid search.
        refine_splat: Splat used by the refinement.
        grid: IWE grid; defaults to the event bounding box grown by 5 px.
        threads: Worker threads for the grid search.
        budget: Maximum number of grid evaluations.
        max_iter: Iteration limit of the refinement.

    Raises:
        ValueError: When `events` is empty.
    """
    if events.is_empty:
        raise ValueError("Optical flow needs at least one event.")
    lattice: SearchGrid = search if search is not None else default_flow_search()
    image_grid: GridSpec = grid if grid is not None else GridSpec.for_events(events)
    model: FlowWarp = FlowWarp()
    coarse_objective: ContrastObjective = ContrastObjective(events, model, image_grid, mode, splat)
    coarse, heatmap = grid_search(coarse_objective, lattice, budget=budget, threads=threads)
    zero: NDArray[np.float64] = np.zeros(model.dim)

    refined: OptimResult | None = None
    theta_star: NDArray[np.float64] = coarse.theta_star
    f_star: float = coarse.f_star
    f_zero: float = coarse_objective(zero)
    if refine:
        fine_objective: ContrastObjective = ContrastObjective(events, model, image_grid, mode, refine_splat)
        refined = conjugate_gradient_ascent(
            fine_objective,
            coarse.theta_star,
            scales=model.scales(events),
            gradient_step=model.gradient_steps(),
            max_iter=max_iter,
            f_rtol=DEFAULT_REFINE_RTOL,
        )
        theta_star, f_star = refined.theta_star, refined.f_star
        f_zero = fine_objective(zero)

    estimate: FlowEstimate = FlowEstimate(
        v_star=FlowParams.from_vector(theta_star),
        f_star=f_star,
        f_zero=f_zero,
        coarse=coarse,
        heatmap=heatmap,
        refined=refined,
        grid=image_grid,
        iwe_zero=accumulate(events, model, zero, image_grid, mode, splat),
        iwe_grid=accumulate(events, model, coarse.theta_star, image_grid, mode, splat),
        iwe_star=accumulate(events, model, theta_star, image_grid, mode, splat),
        mode=mode,
    )
    logger.info("Estimated flow for {events}: {estimate}", events=events.describe(), estimate=estimate.describe())
    return estimate


def half_maximum_basin(heatmap: Heatmap) -> NDArray[np.bool_]:
    """Superlevel set of the heatmap at half its maximum, `f >= max / 2`; non-finite cells are never inside."""
    finite: NDArray[np.bool_] = np.isfinite(heatmap.values)
    if not finite.any():
        return np.zeros(heatmap.values.shape, dtype=bool)
    level: float = 0.5 * float(heatmap.values[finite].max())
    return finite & (np.where(finite, heatmap.values, -np.inf) >= level)


@dataclass(slots=True)
class PolarityComparison:
    """Count-mode versus polarity-mode flow landscapes on one slice and search grid.

    Basin widths are areas (in squared parameter units) of the half-maximum superlevel set of
    each heatmap.
    """

    count: FlowEstimate
    polarity: FlowEstimate
    basin_count: NDArray[np.bool_]
    basin_polarity: NDArray[np.bool_]
    cell_area: float

    @property
    def argmax_count(self) -> NDArray[np.float64]:
        return self.count.v_grid

    @property
    def argmax_polarity(self) -> NDArray[np.float64]:
        return self.polarity.v_grid

    @property
    def basin_width_count(self) -> float:
        return float(np.count_nonzero(self.basin_count)) * self.cell_area

    @property
    def basin_width_polarity(self) -> float:
        return float(np.count_nonzero(self.basin_polarity)) * self.cell_area

    def argmax_cells_apart(self) -> int:
        """Chebyshev distance between the two grid argmaxes, in lattice cells."""
        lattice: SearchGrid = self._lattice()
        offset: NDArray[np.float64] = np.abs(self.argmax_count - self.argmax_polarity) / lattice.cell
        return int(np.round(offset).max())

    def _lattice(self) -> SearchGrid:
        if self.count.heatmap is None:
            raise ValueError("The comparison needs the grid-search heatmaps.")
        return self.count.heatmap.grid

    def to_dict(self) -> dict[str, Any]:
        return {
            "argmax_count": self.argmax_count.tolist(),
            "argmax_polarity": self.argmax_polarity.tolist(),
            "basin_width_count": self.basin_width_count,
            "basin_width_polarity": self.basin_width_polarity,
            "argmax_cells_apart": self.argmax_cells_apart(),
            "f_star_count": self.count.f_star,
            "f_star_polarity": self.polarity.f_star,
        }


def compare_polarity_modes(
    events: EventSlice,
    search: SearchGrid | None = None,
    *,
    splat: SplatKind = SplatKind.BILINEAR,
    grid: GridSpec | None = None,
    threads: int = 1,
    budget: int = DEFAULT_GRID_BUDGET,
) -> PolarityComparison:
    """Run the flow grid search in count and in polarity mode on the same slice and lattice."""
    lattice: SearchGrid = search if search is not None else default_flow_search()
    image_grid: GridSpec = grid if grid is not None else GridSpec.for_events(events)
    estimates: dict[AccumulationMode, FlowEstimate] = {
        mode: estimate_flow_patch(
            events, lattice, refine=False, mode=mode, splat=splat, grid=image_grid, threads=threads, budget=budget
        )
        for mode in (AccumulationMode.COUNT, AccumulationMode.POLARITY)
    }
    count: FlowEstimate = estimates[AccumulationMode.COUNT]
    polarity: FlowEstimate = estimates[AccumulationMode.POLARITY]
    if count.heatmap is None or polarity.heatmap is None:
        raise ValueError("The comparison needs the grid-search heatmaps.")
    comparison: PolarityComparison = PolarityComparison(
        count=count,
        polarity=polarity,
        basin_count=half_maximum_basin(count.heatmap),
        basin_polarity=half_maximum_basin(polarity.heatmap),
        cell_area=float(np.prod(lattice.cell)),
    )
    logger.info("Polarity comparison: {report}", report=comparison.to_dict())
    return comparison
