"""Time the synthetic acceptance scenarios and record their accuracy against ground truth."""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter
from typing import Callable

SCRIPT_DIR: Path = Path(__file__).resolve().parent
REPO_ROOT: Path = SCRIPT_DIR.parent
SRC_PATH: Path = REPO_ROOT / "src"
src_str: str = str(SRC_PATH)
if src_str not in sys.path:
    sys.path.insert(0, src_str)

import numpy as np
import pandas as pd
from loguru import logger
from numpy.typing import NDArray

from event_cmax import (
    AccumulationMode,
    CameraIntrinsics,
    EventSlice,
    HomographyParams,
    SearchGrid,
    SynthConfig,
    gen_flow_scene,
    gen_planar_scene,
    gen_rotation_scene,
)
from event_cmax.pipelines import (
    AngularErrorReport,
    AngularVelocitySeries,
    DepthResult,
    FlowEstimate,
    HomographyError,
    HomographyEstimate,
    SemiDenseDepthMap,
    TrackingConfig,
    depth_for_patch,
    depth_samples,
    estimate_flow_patch,
    estimate_homography,
    homography_error,
    rms_angular_error,
    semidense_depth,
    track_rotation,
)
from event_cmax.synth import ConstantMotion, OmegaProfile, Plane, translation_trajectory
from event_cmax.units import deg_per_s_to_rad_per_s
from event_cmax.writer import write_frame

CAMERA: CameraIntrinsics = CameraIntrinsics.ideal(200.0, 240, 180)
PEAK_SPEED_DEG: float = 670.0
DEPTH_RANGE: tuple[float, float] = (0.45, 2.4)


@dataclass(slots=True)
class ScenarioResult:
    """Timing and accuracy of one scenario; `metric` is compared against `target` (lower is better)."""

    scenario: str
    n_events: int
    metric: str
    value: float
    target: float
    generate_time: float
    estimate_time: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.target

    def to_row(self) -> dict[str, str | float | int]:
        return {
            "scenario": self.scenario,
            "n_events": self.n_events,
            "metric": self.metric,
            "value": self.value,
            "target": self.target,
            "passed": int(self.passed),
            "generate_time_s": self.generate_time,
            "estimate_time_s": self.estimate_time,
        }


def _timed(action: Callable[[], object]) -> tuple[object, float]:
    started: float = perf_counter()
    value: object = action()
    return value, perf_counter() - started


def run_flow(threads: int) -> ScenarioResult:
    started: float = perf_counter()
    stream, _ = gen_flow_scene([-40.0, 0.0], CAMERA, SynthConfig(rate=2.0, duration=0.1, seed=1))
    events: EventSlice = stream.prefix(5_000)
    generated: float = perf_counter() - started
    estimate, elapsed = _timed(
        lambda: estimate_flow_patch(events, SearchGrid.symmetric([80.0, 80.0], [41, 41]), threads=threads)
    )
    assert isinstance(estimate, FlowEstimate)
    error: float = float(np.linalg.norm(estimate.v_star.v - np.array([-40.0, 0.0])))
    return ScenarioResult("flow", len(events), "velocity_error_px_s", error, 2.0, generated, elapsed)


def rotation_profile(duration: float, pieces: int = 50) -> OmegaProfile:
    breaks: NDArray[np.float64] = np.linspace(0.0, duration, pieces + 1)
    phase: NDArray[np.float64] = (breaks[:-1] + breaks[1:]) / (2.0 * duration)
    raw: NDArray[np.float64] = np.column_stack(
        (np.sin(2.0 * math.pi * phase), -0.8 * np.sin(2.0 * math.pi * phase + 1.0), 10.0 * np.sin(math.pi * phase))
    )
    scale: float = float(deg_per_s_to_rad_per_s(PEAK_SPEED_DEG)) / float(np.linalg.norm(raw, axis=1).max())
    return OmegaProfile(breaks=breaks, omegas=raw * scale)


def run_rotation(threads: int, mode: AccumulationMode) -> ScenarioResult:
    started: float = perf_counter()
    events, truth = gen_rotation_scene(rotation_profile(1.0), CAMERA, SynthConfig(rate=0.3, duration=1.0, seed=31))
    generated: float = perf_counter() - started
    config: TrackingConfig = TrackingConfig(window=30_000, stride=30_000, mode=mode)
    series, elapsed = _timed(lambda: track_rotation(events, CAMERA, config, threads=threads))
    assert isinstance(series, AngularVelocitySeries)
    report: AngularErrorReport = rms_angular_error(series, truth.omega_at)
    logger.info("Rotation ({mode}): {report}", mode=mode.value, report=report.describe())
    relative: float = report.rms / PEAK_SPEED_DEG
    return ScenarioResult(f"rotation_{mode.value}", len(events), "rms_relative_to_peak", relative, 0.03, generated, elapsed)


def run_depth(threads: int) -> list[ScenarioResult]:
    started: float = perf_counter()
    events, truth = gen_planar_scene(
        translation_trajectory([0.2, 0.0, 0.0], 1.0),
        Plane.fronto_parallel(1.0),
        CAMERA,
        SynthConfig(rate=2.0, duration=1.0, density=20.0, seed=17),
    )
    generated: float = perf_counter() - started
    curve, patch_time = _timed(lambda: depth_for_patch(events, truth.trajectory, CAMERA, z_range=DEPTH_RANGE))
    assert isinstance(curve, DepthResult)
    depth_map, map_time = _timed(
        lambda: semidense_depth(
            events, truth.trajectory, CAMERA, z_grid=depth_samples(DEPTH_RANGE, 50), threads=threads
        )
    )
    assert isinstance(depth_map, SemiDenseDepthMap)
    outside: float = 1.0 - depth_map.fraction_within(1.0, 0.1)
    return [
        ScenarioResult("depth_patch", len(events), "relative_error", abs(curve.z_refined - 1.0), 0.05, generated, patch_time),
        ScenarioResult("depth_semidense", len(events), "fraction_outside_10pct", outside, 0.1, 0.0, map_time),
    ]


def run_homography() -> list[ScenarioResult]:
    started: float = perf_counter()
    motion: ConstantMotion = ConstantMotion(omega=np.array([0.4, -0.3, 3.0]), v=np.array([1.2, 0.4, 0.3]))
    plane: Plane = Plane(normal=np.array([0.1, -0.15, -1.0]) / math.sqrt(1.0325), d=1.5)
    stream, truth = gen_planar_scene(motion, plane, CAMERA, SynthConfig(rate=2.0, duration=0.2, seed=23))
    events: EventSlice = stream.prefix(50_000)
    generated: float = perf_counter() - started
    expected: HomographyParams = truth.homography_at(events.reference_time)
    start: HomographyParams = HomographyParams.from_normal(
        expected.omega * 0.9, expected.v_over_d * 0.9, [0.0, 0.0, -1.0]
    )
    estimate, elapsed = _timed(lambda: estimate_homography(events, CAMERA, start, max_iter=200))
    assert isinstance(estimate, HomographyEstimate)
    error: HomographyError = homography_error(estimate.params, expected)
    return [
        ScenarioResult("homography_omega", len(events), "relative_error", error.omega_relative, 0.03, generated, elapsed),
        ScenarioResult("homography_normal", len(events), "degrees", error.normal_degrees, 2.0, 0.0, 0.0),
        ScenarioResult("homography_v_over_d", len(events), "relative_error", error.v_over_d_relative, 0.05, 0.0, 0.0),
    ]


SCENARIOS: tuple[str, ...] = ("flow", "rotation", "depth", "homography")


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Benchmark the synthetic acceptance scenarios.")
    parser.add_argument("--scenarios", nargs="+", choices=SCENARIOS, default=list(SCENARIOS), help="Scenarios to run.")
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for grid searches and depth maps.")
    parser.add_argument(
        "--output",
        type=Path,
        default=Path("acceptance_benchmark.csv"),
        help="Summary CSV output path.",
    )
    parser.add_argument("--log-level", default="WARNING", type=str.upper, help="stderr log level.")
    return parser.parse_args()


def main() -> None:
    args: argparse.Namespace = parse_args()
    if args.threads <= 0:
        raise SystemExit("threads must be positive.")
    logger.remove()
    logger.add(sys.stderr, level=args.log_level)

    results: list[ScenarioResult] = []
    for scenario in args.scenarios:
        print(f"Running {scenario}...")
        if scenario == "flow":
            results.append(run_flow(args.threads))
        elif scenario == "rotation":
            results.append(run_rotation(args.threads, AccumulationMode.COUNT))
            results.append(run_rotation(args.threads, AccumulationMode.POLARITY))
        elif scenario == "depth":
            results.extend(run_depth(args.threads))
        else:
            results.extend(run_homography())

    table: pd.DataFrame = pd.DataFrame([result.to_row() for result in results])
    write_frame(args.output, table)
    print(table.to_string(index=False))
    failed: int = sum(not result.passed for result in results)
    print(f"Wrote {len(results)} rows to {args.output}; {failed} outside target.")


if __name__ == "__main__":
    main()
