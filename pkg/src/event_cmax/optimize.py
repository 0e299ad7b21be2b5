"""Maximizers of the contrast objective.

Grid search, central-difference gradients, gradient ascent and nonlinear conjugate gradient
with backtracking or parabolic line searches, plus golden-section search for 1-D problems.
Iterative methods work on parameters divided by per-dimension `scales` so a single gradient
tolerance applies across dimensions; results are reported in the original units.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from .classes_references import EvaluationBudgetError
from .models.base import Validatable
from .type_helpers import CGVariant, LineSearchKind

Objective = Callable[[NDArray[np.float64]], float]

DEFAULT_GRID_BUDGET: int = 250_000
DEFAULT_TOLERANCE: float = 1e-6
DEFAULT_MAX_ITERATIONS: int = 100
DEFAULT_GRADIENT_STEP: float = 1e-3
GOLDEN_RATIO: float = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(slots=True)
class SearchGrid(Validatable):
    """Axis-aligned lattice: `steps[i]` samples from `lower[i]` to `upper[i]` inclusive."""

    lower: list[float]
    upper: list[float]
    steps: list[int]

    def __post_init__(self) -> None:
        self.lower = [float(value) for value in self.lower]
        self.upper = [float(value) for value in self.upper]
        self.steps = [int(value) for value in self.steps]
        self.assert_valid()

    @classmethod
    def symmetric(cls, half_width: Sequence[float], steps: Sequence[int]) -> "SearchGrid":
        return cls(lower=[-value for value in half_width], upper=list(half_width), steps=list(steps))

    @property
    def dim(self) -> int:
        return len(self.steps)

    @property
    def size(self) -> int:
        return math.prod(self.steps)

    @property
    def cell(self) -> NDArray[np.float64]:
        """Lattice spacing per dimension."""
        return np.array([(hi - lo) / (n - 1) for lo, hi, n in zip(self.lower, self.upper, self.steps)])

    def axes(self) -> list[NDArray[np.float64]]:
        return [np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, self.steps)]

    def points(self) -> NDArray[np.float64]:
        """All lattice points in row-major order (last dimension varies fastest)."""
        return np.array(list(itertools.product(*self.axes())), dtype=np.float64).reshape(-1, self.dim)

    def describe(self) -> str:
        bounds: str = ", ".join(f"[{lo:g}, {hi:g}]x{n}" for lo, hi, n in zip(self.lower, self.upper, self.steps))
        return f"SearchGrid({bounds})"

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {"lower": list(self.lower), "upper": list(self.upper), "steps": list(self.steps)}

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if not (len(self.lower) == len(self.upper) == len(self.steps)) or not self.steps:
            errors.append(f"{prefix}Grid bounds and steps must have the same, non-zero length.")
            return errors
        for index, (lo, hi, n) in enumerate(zip(self.lower, self.upper, self.steps)):
            if not lo < hi:
                errors.append(f"{prefix}Dimension {index}: lower bound {lo} must be below upper bound {hi}.")
            if n < 2:
                errors.append(f"{prefix}Dimension {index}: at least 2 steps are required, got {n}.")
        return errors


@dataclass(slots=True, frozen=True)
class TraceEntry:
    theta: tuple[float, ...]
    f: float


@dataclass(slots=True)
class OptimResult:
    """Outcome of a maximization: best parameters, value, counters and the accepted-iterate trace."""

    theta_star: NDArray[np.float64]
    f_star: float
    iterations: int = 0
    evaluations: int = 0
    converged: bool = False
    message: str = ""
    trace: list[TraceEntry] = field(default_factory=list[TraceEntry])

    def trace_frame(self) -> pd.DataFrame:
        """Trace as a table with one `theta_<i>` column per dimension and the objective `f`."""
        rows: list[dict[str, float]] = []
        for iteration, entry in enumerate(self.trace):
            row: dict[str, float] = {"iteration": float(iteration)}
            row.update({f"theta_{index}": value for index, value in enumerate(entry.theta)})
            row["f"] = entry.f
            rows.append(row)
        frame: pd.DataFrame = pd.DataFrame(rows)
        if not frame.empty:
            frame["iteration"] = frame["iteration"].astype(int)
        return frame

    def describe(self) -> str:
        return (
            f"OptimResult(theta*={np.round(self.theta_star, 6).tolist()}, f*={self.f_star:.6g}, "
            f"iterations={self.iterations}, evaluations={self.evaluations}, converged={self.converged})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {
            "theta_star": self.theta_star.tolist(),
            "f_star": self.f_star,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "message": self.message,
        }


@dataclass(slots=True)
class Heatmap:
    """Objective values on a search grid, shaped like the grid (row-major over dimensions)."""

    grid: SearchGrid
    values: NDArray[np.float64]

    def to_frame(self) -> pd.DataFrame:
        """Long table with one `theta_<i>` column per dimension and the objective `f`."""
        columns: dict[str, NDArray[np.float64]] = {}
        points: NDArray[np.float64] = self.grid.points()
        for index in range(self.grid.dim):
            columns[f"theta_{index}"] = points[:, index]
        columns["f"] = self.values.ravel()
        return pd.DataFrame(columns)


@dataclass(slots=True)
class StepPolicy:
    """Line-search settings shared by gradient ascent and conjugate gradient.

    `initial_step` is the length of the first trial step in scaled parameter units; later
    iterations start from the previous accepted length times `growth`.
    """

    initial_step: float = 1.0
    growth: float = 2.0
    shrink: float = 0.5
    armijo_c: float = 1e-4
    min_step: float = 1e-10
    line_search: LineSearchKind = LineSearchKind.ARMIJO


class _CountingObjective:
    """Wrap an objective over scaled coordinates and count evaluations."""

    def __init__(self, function: Objective, scales: NDArray[np.float64]) -> None:
        self._function: Objective = function
        self.scales: NDArray[np.float64] = scales
        self.evaluations: int = 0

    def __call__(self, scaled: NDArray[np.float64]) -> float:
        self.evaluations += 1
        value: float = float(self._function(scaled * self.scales))
        return value if not math.isnan(value) else -math.inf


def grid_search(
    function: Objective,
    grid: SearchGrid,
    *,
    budget: int = DEFAULT_GRID_BUDGET,
    threads: int = 1,
) -> tuple[OptimResult, Heatmap]:
    """
    Evaluate `function` on every lattice point and return the best point with the heatmap.

    Ties resolve to the lowest row-major index. Points are evaluated in a thread pool when
    `threads > 1`; results are gathered in lattice order, so the outcome is schedule independent.

    Raises:
        EvaluationBudgetError: When the lattice has more points than `budget` (before any evaluation).
    """
    if grid.size > budget:
        raise EvaluationBudgetError(requested=grid.size, budget=budget)
    points: NDArray[np.float64] = grid.points()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values_list: list[float] = list(pool.map(function, points))
    else:
        values_list = [function(point) for point in points]
    values: NDArray[np.float64] = np.array(values_list, dtype=np.float64)
    values = np.where(np.isnan(values), -np.inf, values)
    best: int = int(np.argmax(values))
    result: OptimResult = OptimResult(
        theta_star=points[best].copy(),
        f_star=float(values[best]),
        evaluations=int(values.size),
        converged=True,
        message="exhaustive",
        trace=[TraceEntry(theta=tuple(points[best].tolist()), f=float(values[best]))],
    )
    logger.debug(
        "Grid search over {grid}: best {theta} with f={value:.6g}",
        grid=grid.describe(),
        theta=points[best].tolist(),
        value=float(values[best]),
    )
    return result, Heatmap(grid=grid, values=values.reshape(grid.steps))


def numeric_gradient(function: Objective, theta: ArrayLike, step: ArrayLike = DEFAULT_GRADIENT_STEP) -> NDArray[np.float64]:
    """Central differences (f(theta + h e_i) - f(theta - h e_i)) / 2h."""
    point: NDArray[np.float64] = np.asarray(theta, dtype=np.float64).reshape(-1)
    steps: NDArray[np.float64] = np.broadcast_to(np.asarray(step, dtype=np.float64), point.shape).astype(np.float64)
    if np.any(steps <= 0.0):
        raise ValueError("Gradient steps must be positive.")
    gradient: NDArray[np.float64] = np.zeros_like(point)
    for index in range(point.size):
        offset: NDArray[np.float64] = np.zeros_like(point)
        offset[index] = steps[index]
        gradient[index] = (function(point + offset) - function(point - offset)) / (2.0 * steps[index])
    return gradient


def _armijo(
    objective: _CountingObjective,
    point: NDArray[np.float64],
    value: float,
    direction: NDArray[np.float64],
    slope: float,
    trial_length: float,
    policy: StepPolicy,
) -> tuple[float, float] | None:
    """Backtrack from `trial_length` until the Armijo condition holds; None when the step collapses."""
    norm: float = float(np.linalg.norm(direction))
    alpha: float = trial_length / norm
    while alpha * norm >= policy.min_step:
        candidate: float = objective(point + alpha * direction)
        if math.isfinite(candidate) and candidate >= value + policy.armijo_c * alpha * slope:
            return alpha, candidate
        alpha *= policy.shrink
    return None


def _parabolic(
    objective: _CountingObjective,
    point: NDArray[np.float64],
    value: float,
    direction: NDArray[np.float64],
    slope: float,
    trial_length: float,
    policy: StepPolicy,
) -> tuple[float, float] | None:
    """Fit phi(a) = value + slope a + c a^2 through one trial step and jump to its vertex.

    Exact on quadratic objectives; falls back to Armijo backtracking when the fit is not
    concave or the vertex does not improve enough.
    """
    norm: float = float(np.linalg.norm(direction))
    alpha_trial: float = trial_length / norm
    trial_value: float = objective(point + alpha_trial * direction)
    if math.isfinite(trial_value):
        curvature: float = (trial_value - value - slope * alpha_trial) / (alpha_trial * alpha_trial)
        candidates: list[tuple[float, float]] = [(alpha_trial, trial_value)]
        if curvature < 0.0:
            alpha_vertex: float = -slope / (2.0 * curvature)
            vertex_value: float = objective(point + alpha_vertex * direction)
            if math.isfinite(vertex_value):
                candidates.append((alpha_vertex, vertex_value))
        alpha_best, value_best = max(candidates, key=lambda item: item[1])
        if value_best >= value + policy.armijo_c * alpha_best * slope:
            return alpha_best, value_best
    return _armijo(objective, point, value, direction, slope, 0.5 * trial_length, policy)


def _ascend(
    function: Objective,
    theta0: ArrayLike,
    *,
    variant: CGVariant,
    restart_every: int | None,
    max_iter: int,
    tol: float,
    f_rtol: float,
    scales: ArrayLike | None,
    gradient_step: ArrayLike,
    policy: StepPolicy,
) -> OptimResult:
    start: NDArray[np.float64] = np.asarray(theta0, dtype=np.float64).reshape(-1)
    scale: NDArray[np.float64] = (
        np.ones_like(start) if scales is None else np.broadcast_to(np.asarray(scales, dtype=np.float64), start.shape)
    ).astype(np.float64)
    objective: _CountingObjective = _CountingObjective(function, scale)
    scaled_step: NDArray[np.float64] = np.broadcast_to(np.asarray(gradient_step, dtype=np.float64), start.shape) / scale
    restart: int = restart_every if restart_every is not None else start.size
    search = _parabolic if policy.line_search is LineSearchKind.PARABOLIC else _armijo

    point: NDArray[np.float64] = start / scale
    value: float = objective(point)
    gradient: NDArray[np.float64] = numeric_gradient(objective, point, scaled_step)
    trace: list[TraceEntry] = [TraceEntry(theta=tuple((point * scale).tolist()), f=value)]
    direction: NDArray[np.float64] = gradient.copy()
    trial_length: float = policy.initial_step
    converged: bool = False
    message: str = "maximum iterations reached"
    iterations: int = 0

    if not np.all(np.isfinite(gradient)):
        message = "non-finite gradient"
    elif float(np.linalg.norm(gradient)) < tol:
        converged, message = True, "gradient below tolerance"
    else:
        for iterations in range(1, max_iter + 1):
            slope: float = float(gradient @ direction)
            if slope <= 0.0:
                direction = gradient.copy()
                slope = float(gradient @ gradient)
            step = search(objective, point, value, direction, slope, trial_length, policy)
            if step is None:
                iterations -= 1
                converged, message = True, "step length below minimum"
                break
            alpha, new_value = step
            stalled: bool = f_rtol > 0.0 and new_value - value <= f_rtol * abs(value)
            trial_length = alpha * float(np.linalg.norm(direction)) * policy.growth
            point = point + alpha * direction
            value = new_value
            trace.append(TraceEntry(theta=tuple((point * scale).tolist()), f=value))
            if stalled:
                converged, message = True, "relative improvement below tolerance"
                break
            new_gradient: NDArray[np.float64] = numeric_gradient(objective, point, scaled_step)
            logger.debug(
                "Iteration {iteration}: f={value:.8g}, |g|={norm:.3e}",
                iteration=iterations,
                value=value,
                norm=float(np.linalg.norm(new_gradient)),
            )
            if not np.all(np.isfinite(new_gradient)):
                message = "non-finite gradient"
                break
            if float(np.linalg.norm(new_gradient)) < tol:
                converged, message = True, "gradient below tolerance"
                break
            beta: float = _beta(variant, gradient, new_gradient)
            if iterations % restart == 0:
                beta = 0.0
            direction = new_gradient + beta * direction
            gradient = new_gradient

    return OptimResult(
        theta_star=point * scale,
        f_star=value,
        iterations=iterations,
        evaluations=objective.evaluations,
        converged=converged,
        message=message,
        trace=trace,
    )


def _beta(variant: CGVariant, gradient: NDArray[np.float64], new_gradient: NDArray[np.float64]) -> float:
    denominator: float = float(gradient @ gradient)
    if variant is CGVariant.STEEPEST or denominator == 0.0:
        return 0.0
    if variant is CGVariant.FLETCHER_REEVES:
        return float(new_gradient @ new_gradient) / denominator
    return max(0.0, float(new_gradient @ (new_gradient - gradient)) / denominator)


def gradient_ascent(
    function: Objective,
    theta0: ArrayLike,
    *,
    policy: StepPolicy | None = None,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    tol: float = DEFAULT_TOLERANCE,
    f_rtol: float = 0.0,
    scales: ArrayLike | None = None,
    gradient_step: ArrayLike = DEFAULT_GRADIENT_STEP,
) -> OptimResult:
    """Steepest ascent on the numeric gradient with a backtracking (Armijo) line search."""
    result: OptimResult = _ascend(
        function,
        theta0,
        variant=CGVariant.STEEPEST,
        restart_every=None,
        max_iter=max_iter,
        tol=tol,
        f_rtol=f_rtol,
        scales=scales,
        gradient_step=gradient_step,
        policy=policy or StepPolicy(),
    )
    logger.debug("Gradient ascent finished: {result}", result=result.describe())
    return result


def conjugate_gradient_ascent(
    function: Objective,
    theta0: ArrayLike,
    *,
    variant: CGVariant = CGVariant.POLAK_RIBIERE_PLUS,
    restart_every: int | None = None,
    policy: StepPolicy | None = None,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    tol: float = DEFAULT_TOLERANCE,
    f_rtol: float = 0.0,
    scales: ArrayLike | None = None,
    gradient_step: ArrayLike = DEFAULT_GRADIENT_STEP,
) -> OptimResult:
    """
    Nonlinear conjugate gradient ascent.

    Args:
        function: Objective to maximize.
        theta0: Starting parameters.
        variant: Direction update; Polak-Ribiere+ clamps beta at 0.
        restart_every: Reset to steepest ascent every this many iterations (default: dimension).
        policy: Line-search settings.
        max_iter: Iteration limit; reaching it leaves `converged` False.
        tol: Gradient-norm tolerance in scaled units.
        f_rtol: Stop once an accepted step improves f by less than this fraction of |f| (0 disables).
        scales: Characteristic parameter scales.
        gradient_step: Central-difference step in parameter units.
    """
    result: OptimResult = _ascend(
        function,
        theta0,
        variant=variant,
        restart_every=restart_every,
        max_iter=max_iter,
        tol=tol,
        f_rtol=f_rtol,
        scales=scales,
        gradient_step=gradient_step,
        policy=policy or StepPolicy(),
    )
    logger.debug("Conjugate gradient ({variant}) finished: {result}", variant=variant.value, result=result.describe())
    return result


def golden_section_max(
    function: Callable[[float], float], lower: float, upper: float, tol: float = 1e-6
) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal function on [lower, upper].

    The endpoints are evaluated as well, so monotone functions return the better endpoint.
    """
    if not lower < upper:
        raise ValueError(f"Golden-section search needs lower < upper, got [{lower}, {upper}].")
    if not (math.isfinite(tol) and tol > 0.0):
        raise ValueError(f"Golden-section tolerance must be positive, got {tol}.")
    # bracket widths below the float spacing of the endpoints never shrink
    resolution: float = max(tol, 8.0 * float(np.finfo(np.float64).eps) * max(abs(lower), abs(upper), 1.0))
    a: float = lower
    b: float = upper
    f_lower: float = function(lower)
    f_upper: float = function(upper)
    c: float = b - GOLDEN_RATIO * (b - a)
    d: float = a + GOLDEN_RATIO * (b - a)
    f_c: float = function(c)
    f_d: float = function(d)
    while b - a >= resolution:
        if f_c >= f_d:
            b, d, f_d = d, c, f_c
            c = b - GOLDEN_RATIO * (b - a)
            f_c = function(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + GOLDEN_RATIO * (b - a)
            f_d = function(d)
    middle: float = 0.5 * (a + b)
    candidates: list[tuple[float, float]] = [(middle, function(middle)), (lower, f_lower), (upper, f_upper)]
    best: tuple[float, float] = max(candidates, key=lambda item: item[1])
    return best
