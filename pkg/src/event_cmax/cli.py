"Command-line entry point for event-cmax."

from __future__ import annotations

import argparse
import sys
import time
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger

from .classes_references import ValidationError
from .config import RunConfig, merge_mappings, read_config_mapping, run_config_from_mapping
from .iwe import IWE, GridSpec, accumulate
from .models import CameraIntrinsics, EventSlice, Pose, PoseTrajectory
from .output_paths import default_run_directory
from .pipelines import (
    AngularErrorReport,
    AngularVelocitySeries,
    DepthResult,
    FlowEstimate,
    HomographyEstimate,
    HomographySeries,
    PolarityComparison,
    SemiDenseDepthMap,
    TrackingConfig,
    compare_polarity_modes,
    depth_for_patch,
    depth_samples,
    depth_vs_event_count,
    estimate_flow_patch,
    estimate_homography,
    rms_angular_error,
    semidense_depth,
    track_homography,
    track_rotation,
)
from .reader import load_calibration, load_events, load_trajectory, slice_events
from .render import render_depth, render_heatmap, render_iwe, render_raster, save_image, count_to_gray
from .synth import gen_flow_scene, gen_planar_scene, gen_rotation_scene
from .type_helpers import AccumulationMode, Problem, RefTimePolicy, SliceBy, SplatKind
from .warps import PlaneDepthWarp, RotationWarp
from .writer import DatasetFiles, DatasetWriter, write_frame, write_json, write_raster

LOG_LEVELS: tuple[str, ...] = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")
RUN_FILENAME: str = "run.json"
SUMMARY_FILENAME: str = "summary.json"
EXIT_OK: int = 0
EXIT_FAILURE: int = 1
EXIT_USAGE: int = 2

Summary = dict[str, Any]


def _common_options() -> argparse.ArgumentParser:
    common: argparse.ArgumentParser = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration (for example a previous run.json).")
    common.add_argument("--output", type=Path, help="Output directory (image file for `render`).")
    common.add_argument("--threads", type=int, help="Worker threads (default: all cores).")
    common.add_argument("--log-level", default="WARNING", type=str.upper, choices=LOG_LEVELS, help="stderr log level.")
    common.add_argument("--mode", choices=[mode.value for mode in AccumulationMode], help="Event accumulation mode.")
    common.add_argument("--splat", choices=[kind.value for kind in SplatKind], help="Splat kernel.")
    return common


def _input_options() -> argparse.ArgumentParser:
    inputs: argparse.ArgumentParser = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--events", type=Path, help="events.txt (t x y p).")
    inputs.add_argument("--calib", type=Path, help="calib.txt (fx fy cx cy [k1 k2 p1 p2 k3]).")
    inputs.add_argument("--relative-time", action="store_true", default=None, help="Subtract the first timestamp.")
    return inputs


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline."""
    parser: argparse.ArgumentParser = argparse.ArgumentParser(
        prog="event-cmax", description="Contrast maximization for event cameras."
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common: argparse.ArgumentParser = _common_options()
    inputs: argparse.ArgumentParser = _input_options()

    synth: argparse.ArgumentParser = subparsers.add_parser(
        "synth", parents=[common], help="Generate a synthetic dataset with ground truth."
    )
    synth.add_argument("--problem", choices=[problem.value for problem in Problem], help="Scene and motion type.")
    synth.add_argument("--v", nargs=2, type=float, metavar=("VX", "VY"), help="Image velocity (px/s) for flow.")
    synth.add_argument("--omega", nargs=3, type=float, metavar=("WX", "WY", "WZ"), help="Angular velocity (rad/s).")
    synth.add_argument("--linear-velocity", nargs=3, type=float, metavar=("VX", "VY", "VZ"), help="Camera velocity (m/s).")
    synth.add_argument("--plane-depth", type=float, help="Distance of the scene plane (m).")
    synth.add_argument("--seed", type=int, help="Random seed.")
    synth.add_argument("--duration", type=float, help="Sequence length (s).")
    synth.add_argument("--rate", type=float, help="Events per edge pixel per pixel of travel.")
    synth.add_argument("--noise", type=float, help="Pixel noise sigma (px).")
    synth.add_argument("--jitter", type=float, help="Timestamp jitter sigma (s).")
    synth.add_argument("--density", type=float, help="Edge segments per 100 x 100 px.")

    flow: argparse.ArgumentParser = subparsers.add_parser(
        "flow", parents=[common, inputs], help="Estimate the optical flow of an event patch."
    )
    flow.add_argument("--half-width", type=float, help="Velocity search half width (px/s).")
    flow.add_argument("--steps", type=int, help="Search samples per axis.")
    flow.add_argument("--no-refine", dest="refine", action="store_false", default=None, help="Grid search only.")
    flow.add_argument("--compare-modes", action="store_true", default=None, help="Also compare count and polarity modes.")
    flow.add_argument("--patch", nargs=4, type=float, metavar=("X0", "Y0", "X1", "Y1"), help="Crop events to a box.")

    rotate: argparse.ArgumentParser = subparsers.add_parser(
        "rotate", parents=[common, inputs], help="Track angular velocity on sliding windows."
    )
    rotate.add_argument("--poses", type=Path, help="Ground-truth poses.txt for error evaluation.")
    rotate.add_argument("--window", type=int, help="Events per window.")
    rotate.add_argument("--stride", type=int, help="Events between window starts.")
    rotate.add_argument("--no-warm-start", dest="warm_start", action="store_false", default=None)

    depth: argparse.ArgumentParser = subparsers.add_parser(
        "depth", parents=[common, inputs], help="Plane-sweep depth with a known trajectory."
    )
    depth.add_argument("--poses", type=Path, help="Camera trajectory poses.txt.")
    depth.add_argument("--z-min", type=float)
    depth.add_argument("--z-max", type=float)
    depth.add_argument("--z-steps", type=int)
    depth.add_argument("--patch-center", nargs=2, type=int, metavar=("COL", "ROW"))
    depth.add_argument("--counts", nargs="+", type=int, help="Event counts for the depth-versus-events study.")
    depth.add_argument("--truth-depth", type=float, help="Known scene depth (m) for error reporting.")

    homog: argparse.ArgumentParser = subparsers.add_parser(
        "homog", parents=[common, inputs], help="Estimate planar-scene motion (8-DOF homography)."
    )
    homog.add_argument("--window", type=int, help="Events per window.")
    homog.add_argument("--track", action="store_true", default=None, help="Estimate every window.")

    render: argparse.ArgumentParser = subparsers.add_parser(
        "render", parents=[common], help="Render a raw IWE or depth grid to PNG/PGM."
    )
    render.add_argument("raster", type=Path, help="Raw grid file.")
    render.add_argument("--negative", action=argparse.BooleanOptionalAction, default=None)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Flags as a config mapping; unset flags are None and leave the config untouched."""
    values: dict[str, Any] = vars(args)

    def flag(name: str) -> Any:
        return values.get(name)

    return {
        "command": args.command,
        "events": flag("events"),
        "calibration": flag("calib"),
        "poses": flag("poses"),
        "raster": flag("raster"),
        "output": flag("output"),
        "threads": flag("threads"),
        "relative_time": flag("relative_time"),
        "accumulation": {"mode": flag("mode"), "splat": flag("splat"), "negative": flag("negative")},
        "synth": {
            "problem": flag("problem"),
            "velocity": flag("v"),
            "omega": flag("omega"),
            "planar_omega": flag("omega") if flag("problem") in ("depth", "homography") else None,
            "linear_velocity": flag("linear_velocity"),
            "plane_depth": flag("plane_depth"),
            "seed": flag("seed"),
            "duration": flag("duration"),
            "rate": flag("rate"),
            "noise_sigma": flag("noise"),
            "jitter": flag("jitter"),
            "density": flag("density"),
        },
        "flow": {
            "half_width": flag("half_width"),
            "steps": flag("steps"),
            "refine": flag("refine"),
            "compare_modes": flag("compare_modes"),
            "patch": flag("patch"),
        },
        "rotation": {
            "window": flag("window") if args.command == "rotate" else None,
            "stride": flag("stride"),
            "warm_start": flag("warm_start"),
        },
        "depth": {
            "z_min": flag("z_min"),
            "z_max": flag("z_max"),
            "z_steps": flag("z_steps"),
            "patch_center": flag("patch_center"),
            "counts": flag("counts"),
            "truth_depth": flag("truth_depth"),
        },
        "homography": {
            "window": flag("window") if args.command == "homog" else None,
            "track": flag("track"),
        },
    }


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then `--config`, then explicit flags."""
    base: dict[str, Any] = read_config_mapping(args.config) if args.config is not None else {}
    run: RunConfig = run_config_from_mapping(merge_mappings(base, _overrides(args)))
    if run.output is None and run.command != "render":
        run.output = default_run_directory(run.command)
    return run


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse command line arguments and dispatch the requested subcommand."""
    parser: argparse.ArgumentParser = build_parser()
    args: argparse.Namespace = parser.parse_args(list(argv) if argv is not None else None)
    _configure_logging(args.log_level)
    try:
        run: RunConfig = resolve_run_config(args)
        run.assert_valid()
    except ValidationError as exc:
        print("Invalid configuration:\n" + "\n".join(exc.errors), file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"Invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE

    handlers: dict[str, Callable[[RunConfig, Path], Summary]] = {
        "synth": _run_synth,
        "flow": _run_flow,
        "rotate": _run_rotate,
        "depth": _run_depth,
        "homog": _run_homography,
    }
    try:
        if run.command == "render":
            _run_render(run, negative=args.negative)
            return EXIT_OK
        output: Path = run.output if run.output is not None else default_run_directory(run.command)
        started: float = time.perf_counter()
        output.mkdir(parents=True, exist_ok=True)
        write_json(output / RUN_FILENAME, run.to_dict())
        summary: Summary = {"command": run.command}
        summary.update(handlers[run.command](run, output))
        summary["wall_time_s"] = time.perf_counter() - started
        write_json(output / SUMMARY_FILENAME, summary)
    except (ValueError, OSError) as exc:
        print(f"{run.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"Wrote {run.command} results to {output}")
    return EXIT_OK


def _load_inputs(run: RunConfig) -> tuple[EventSlice, CameraIntrinsics]:
    assert run.events is not None and run.calibration is not None
    camera: CameraIntrinsics = load_calibration(run.calibration)
    events: EventSlice = load_events(run.events, camera=camera, relative_time=run.relative_time)
    return events, camera.undistorted()


def _write_iwe(output: Path, name: str, iwe: IWE, *, negative: bool) -> None:
    write_raster(output / f"{name}.raw", iwe.values, kind=iwe.mode.value)
    render_iwe(iwe, output / f"{name}.png", negative=negative)


def _run_synth(run: RunConfig, output: Path) -> Summary:
    """Generate a dataset and write events, calibration, poses and ground truth."""
    section = run.synth
    camera: CameraIntrinsics = section.camera()
    trajectory: PoseTrajectory | None = None
    if section.problem is Problem.FLOW:
        events, velocity = gen_flow_scene(section.velocity, camera, section.synth_config())
        truth: dict[str, Any] = {"problem": "flow", "v": velocity.v.tolist()}
    elif section.problem is Problem.ROTATION:
        events, rotation = gen_rotation_scene(section.omega_profile(), camera, section.synth_config())
        truth = rotation.to_dict()
        trajectory = rotation.trajectory
    else:
        events, planar = gen_planar_scene(section.motion(), section.plane(), camera, section.synth_config())
        truth = planar.to_dict()
        trajectory = planar.trajectory
    truth.update({"seed": section.seed, "generator": section.to_dict(), "camera": camera.to_dict()})
    files: DatasetFiles = DatasetWriter(events, camera, trajectory=trajectory, ground_truth=truth).write(output)
    return {"n_events": len(events), "files": files.to_dict(), "ground_truth": truth}


def _run_flow(run: RunConfig, output: Path) -> Summary:
    events, _ = _load_inputs(run)
    section = run.flow
    if section.patch is not None:
        x0, y0, x1, y1 = section.patch
        events = events.select((events.x >= x0) & (events.x < x1) & (events.y >= y0) & (events.y < y1))
    accumulation = run.accumulation
    estimate: FlowEstimate = estimate_flow_patch(
        events,
        section.search(),
        refine=section.refine,
        mode=accumulation.mode,
        splat=accumulation.splat,
        threads=run.threads,
    )
    write_frame(
        output / "flow_estimate.csv",
        pd.DataFrame(
            [{"vx": estimate.v_star.v[0], "vy": estimate.v_star.v[1], "f": estimate.f_star, "f_zero": estimate.f_zero}]
        ),
    )
    if estimate.heatmap is not None:
        write_frame(output / "heatmap.csv", estimate.heatmap.to_frame())
        render_heatmap(estimate.heatmap, output / "heatmap.png")
    _write_iwe(output, "iwe_zero", estimate.iwe_zero, negative=accumulation.negative)
    _write_iwe(output, "iwe_grid", estimate.iwe_grid, negative=accumulation.negative)
    _write_iwe(output, "iwe_star", estimate.iwe_star, negative=accumulation.negative)
    result: Summary = {
        "theta_star": estimate.v_star.v.tolist(),
        "f_star": estimate.f_star,
        "evaluations": estimate.evaluations,
        "estimate": estimate.to_dict(),
    }
    if section.compare_modes:
        comparison: PolarityComparison = compare_polarity_modes(
            events, section.search(), splat=accumulation.splat, threads=run.threads
        )
        for label, mode_estimate in (("count", comparison.count), ("polarity", comparison.polarity)):
            if mode_estimate.heatmap is not None:
                render_heatmap(mode_estimate.heatmap, output / f"heatmap_{label}.png")
        result["polarity_comparison"] = comparison.to_dict()
    return result


def _rotation_window_images(
    output: Path,
    events: EventSlice,
    camera: CameraIntrinsics,
    tracking: TrackingConfig,
    series: AngularVelocitySeries,
    *,
    negative: bool,
) -> None:
    """Identity and optimum IWEs of the first estimated window."""
    if len(series) == 0:
        return
    sample = series.samples[0]
    windows: list[EventSlice] = slice_events(
        events, SliceBy.COUNT, tracking.window, tracking.effective_stride, ref_policy=RefTimePolicy.FIRST
    )
    matching: list[EventSlice] = [window for window in windows if window.t_mid == sample.t_mid]
    if not matching:
        return
    model: RotationWarp = RotationWarp(camera)
    grid: GridSpec = GridSpec.for_camera(camera)
    mode: AccumulationMode = tracking.mode
    identity: IWE = accumulate(matching[0], model, np.zeros(3), grid, mode, tracking.splat)
    corrected: IWE = accumulate(matching[0], model, sample.omega, grid, mode, tracking.splat)
    _write_iwe(output, "iwe_identity", identity, negative=negative)
    _write_iwe(output, "iwe_corrected", corrected, negative=negative)


def _run_rotate(run: RunConfig, output: Path) -> Summary:
    events, camera = _load_inputs(run)
    tracking: TrackingConfig = run.rotation.tracking(run.accumulation)
    series: AngularVelocitySeries = track_rotation(events, camera, tracking, threads=run.threads)
    write_frame(output / "angular_velocity.csv", series.to_frame())
    _rotation_window_images(output, events, camera, tracking, series, negative=run.accumulation.negative)
    result: Summary = {
        "windows": len(series),
        "low_confidence": int(series.low_confidence.sum()),
        "evaluations": sum(sample.evaluations for sample in series.samples),
        "theta_star": series.omegas.tolist(),
        "f_star": [sample.f_star for sample in series.samples],
    }
    if run.poses is not None and len(series):
        trajectory: PoseTrajectory = load_trajectory(run.poses, time_offset=events.time_offset)
        report: AngularErrorReport = rms_angular_error(series, trajectory, subinterval=run.rotation.subinterval)
        write_frame(output / "angular_velocity_errors.csv", report.errors)
        write_frame(output / "error_boxplot.csv", report.subintervals)
        result["error"] = report.to_dict()
    return result


def _run_depth(run: RunConfig, output: Path) -> Summary:
    events, camera = _load_inputs(run)
    assert run.poses is not None
    trajectory: PoseTrajectory = load_trajectory(run.poses, time_offset=events.time_offset)
    section = run.depth
    reference: Pose | None = (
        trajectory.interpolate(section.reference_time) if section.reference_time is not None else None
    )
    center: tuple[int, int] | None = (
        (section.patch_center[0], section.patch_center[1]) if section.patch_center is not None else None
    )
    curve: DepthResult = depth_for_patch(
        events,
        trajectory,
        camera,
        reference=reference,
        center=center,
        z_range=section.z_range,
        z_steps=section.z_steps,
        patch_size=section.patch_size,
        mode=run.accumulation.mode,
        splat=run.accumulation.splat,
    )
    write_frame(output / "contrast_vs_depth.csv", curve.to_frame())
    z_grid = depth_samples(section.z_range, section.z_steps)
    depth_map: SemiDenseDepthMap = semidense_depth(
        events,
        trajectory,
        camera,
        reference=reference,
        z_grid=z_grid,
        block_size=section.block_size,
        offset=section.offset,
        median_size=section.median_size,
        mode=run.accumulation.mode,
        splat=run.accumulation.splat,
        threads=run.threads,
    )
    write_raster(output / "depth.raw", depth_map.depth, kind="depth", dtype="float32")
    render_depth(depth_map.depth, output / "depth.png", limits=section.z_range)
    write_raster(output / "contrast_map.raw", depth_map.contrast_map, kind="contrast")
    save_image(output / "contrast_map.png", count_to_gray(depth_map.contrast_map, negative=run.accumulation.negative))
    if not events.is_empty:
        view: Pose = reference if reference is not None else trajectory.interpolate(events.t_mid)
        warp: PlaneDepthWarp = PlaneDepthWarp(camera, trajectory, view)
        best: IWE = accumulate(
            events,
            warp,
            np.array([curve.z_refined]),
            GridSpec.for_camera(camera),
            run.accumulation.mode,
            run.accumulation.splat,
        )
        _write_iwe(output, "iwe_best_depth", best, negative=run.accumulation.negative)
    result: Summary = {
        "theta_star": curve.z_refined,
        "f_star": curve.f_refined,
        "curve": curve.to_dict(),
        "depth_map": depth_map.to_dict(),
    }
    truth: float | None = section.truth_depth
    if truth is not None:
        result["depth_rms"] = depth_map.rms_error(truth)
    if section.counts:
        runs = depth_vs_event_count(
            events, trajectory, camera, section.counts, truth=truth, reference=reference, z_grid=z_grid, threads=run.threads
        )
        write_frame(output / "depth_vs_events.csv", pd.DataFrame([entry.to_dict() for entry in runs]))
        result["depth_vs_events"] = [entry.to_dict() for entry in runs]
    return result


def _homography_rows(estimates: list[HomographyEstimate]) -> pd.DataFrame:
    return pd.DataFrame(HomographySeries(estimates).to_rows())


def _run_homography(run: RunConfig, output: Path) -> Summary:
    events, camera = _load_inputs(run)
    section = run.homography
    accumulation = run.accumulation
    if section.track:
        series: HomographySeries = track_homography(
            events,
            camera,
            window=section.window,
            theta0=section.theta0(),
            mode=accumulation.mode,
            splat=accumulation.splat,
            max_iter=section.max_iter,
        )
        write_frame(output / "homography.csv", pd.DataFrame(series.to_rows()))
        return {"windows": len(series), "estimates": [estimate.to_dict() for estimate in series.estimates]}
    window: EventSlice = events.prefix(section.window).with_t_ref(events.t_start)
    estimate: HomographyEstimate = estimate_homography(
        window, camera, section.theta0(), mode=accumulation.mode, splat=accumulation.splat, max_iter=section.max_iter
    )
    write_frame(output / "homography.csv", _homography_rows([estimate]))
    _write_iwe(output, "iwe_identity", estimate.iwe_identity, negative=accumulation.negative)
    _write_iwe(output, "iwe_corrected", estimate.iwe_corrected, negative=accumulation.negative)
    return {
        "theta_star": estimate.theta8.tolist(),
        "f_star": estimate.f_star,
        "evaluations": estimate.result.evaluations,
        "estimate": estimate.to_dict(),
    }


def _run_render(run: RunConfig, *, negative: bool | None) -> Path:
    assert run.raster is not None
    destination: Path = run.output if run.output is not None else run.raster.with_suffix(".png")
    show_negative: bool = run.accumulation.negative if negative is None else negative
    path: Path = render_raster(run.raster, destination, negative=show_negative)
    print(f"Rendered {run.raster} to {path}")
    return path
