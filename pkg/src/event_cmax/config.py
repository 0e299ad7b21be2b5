"""Helpers for loading `RunConfig` instances from JSON configuration files."""

from __future__ import annotations

import json
import os
from collections.abc import Mapping, Sequence as ABCSequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, cast

import numpy as np

from .classes_references import SceneGeometryError, ValidationError
from .models import CameraIntrinsics, HomographyParams
from .models.base import Validatable, normalize_mapping
from .pipelines.depth import (
    DEFAULT_ADAPTIVE_BLOCK,
    DEFAULT_DEPTH_RANGE,
    DEFAULT_DEPTH_STEPS,
    DEFAULT_MEDIAN_SIZE,
    DEFAULT_PATCH_SIZE,
)
from .pipelines.flow import DEFAULT_FLOW_HALF_WIDTH, DEFAULT_FLOW_STEPS
from .pipelines.homography import DEFAULT_HOMOGRAPHY_WINDOW
from .pipelines.metrics import DEFAULT_SUBINTERVAL
from .pipelines.rotation import DEFAULT_TRACKING_ITERATIONS, DEFAULT_TRACKING_RTOL, DEFAULT_WINDOW_EVENTS, TrackingConfig
from .optimize import DEFAULT_MAX_ITERATIONS, SearchGrid
from .synth import DEFAULT_DENSITY, DEFAULT_RATE, ConstantMotion, OmegaProfile, Plane, SynthConfig, check_plane_in_front
from .type_helpers import AccumulationMode, Problem, SplatKind, coerce_enum

JSONMapping = Mapping[str, Any]

COMMANDS: tuple[str, ...] = ("synth", "flow", "rotate", "depth", "homog", "render")
DEFAULT_SENSOR: tuple[int, int] = (240, 180)
DEFAULT_FOCAL: float = 200.0


def default_threads() -> int:
    return os.cpu_count() or 1


@dataclass(slots=True)
class AccumulationSection(Validatable):
    """How events are accumulated and how IWEs are displayed."""

    mode: AccumulationMode = AccumulationMode.COUNT
    splat: SplatKind = SplatKind.BILINEAR
    negative: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {"mode": self.mode.value, "splat": self.splat.value, "negative": self.negative}

    def validate(self, prefix: str = "") -> list[str]:
        return []


@dataclass(slots=True)
class SynthSection(Validatable):
    """Scene, motion and event-model settings for `synth`.

    `profile_breaks`/`profile_omegas` describe a piecewise-constant angular velocity and
    take precedence over `omega` when given. Planar problems (depth, homography) move the
    camera with `planar_omega` and `linear_velocity` in front of the plane
    `plane_normal . X + plane_depth = 0`.
    """

    problem: Problem = Problem.FLOW
    seed: int = 0
    width: int = DEFAULT_SENSOR[0]
    height: int = DEFAULT_SENSOR[1]
    focal: float = DEFAULT_FOCAL
    rate: float = DEFAULT_RATE
    noise_sigma: float = 0.0
    jitter: float = 0.0
    duration: float = 0.1
    density: float = DEFAULT_DENSITY
    velocity: list[float] = field(default_factory=lambda: [-40.0, 0.0])
    omega: list[float] = field(default_factory=lambda: [0.0, 0.0, 2.0])
    profile_breaks: list[float] = field(default_factory=list[float])
    profile_omegas: list[list[float]] = field(default_factory=list[list[float]])
    planar_omega: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    linear_velocity: list[float] = field(default_factory=lambda: [2.0, 0.0, 0.0])
    plane_normal: list[float] = field(default_factory=lambda: [0.0, 0.0, -1.0])
    plane_depth: float = 1.0

    def camera(self) -> CameraIntrinsics:
        return CameraIntrinsics.ideal(self.focal, self.width, self.height)

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            rate=self.rate,
            noise_sigma=self.noise_sigma,
            jitter=self.jitter,
            duration=self.duration,
            seed=self.seed,
            density=self.density,
        )

    def omega_profile(self) -> OmegaProfile:
        if self.profile_breaks:
            return OmegaProfile(breaks=np.array(self.profile_breaks), omegas=np.array(self.profile_omegas))
        return OmegaProfile.constant(self.omega, self.duration)

    def motion(self) -> ConstantMotion:
        return ConstantMotion(omega=np.array(self.planar_omega), v=np.array(self.linear_velocity))

    def plane(self) -> Plane:
        return Plane(normal=np.array(self.plane_normal), d=self.plane_depth)

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem": self.problem.value,
            "seed": self.seed,
            "width": self.width,
            "height": self.height,
            "focal": self.focal,
            "rate": self.rate,
            "noise_sigma": self.noise_sigma,
            "jitter": self.jitter,
            "duration": self.duration,
            "density": self.density,
            "velocity": list(self.velocity),
            "omega": list(self.omega),
            "profile_breaks": list(self.profile_breaks),
            "profile_omegas": [list(row) for row in self.profile_omegas],
            "planar_omega": list(self.planar_omega),
            "linear_velocity": list(self.linear_velocity),
            "plane_normal": list(self.plane_normal),
            "plane_depth": self.plane_depth,
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = self.synth_config().validate(prefix)
        if self.width < 1 or self.height < 1:
            errors.append(f"{prefix}Sensor size must be positive, got {self.width}x{self.height}.")
        if not self.focal > 0.0:
            errors.append(f"{prefix}Focal length must be positive, got {self.focal}.")
        if self.profile_breaks:
            try:
                self.omega_profile()
            except (ValidationError, ValueError) as exc:
                messages: list[str] = exc.errors if isinstance(exc, ValidationError) else [str(exc)]
                errors.extend(f"{prefix}{message}" for message in messages)
            if self.profile_breaks[0] != 0.0 or abs(self.profile_breaks[-1] - self.duration) > 1e-12:
                errors.append(f"{prefix}The angular-velocity profile must span [0, duration].")
        if not np.linalg.norm(self.plane_normal) > 0.0:
            errors.append(f"{prefix}Plane normal must be non-zero.")
        if not errors and self.problem in (Problem.DEPTH, Problem.HOMOGRAPHY):
            errors.extend(self._plane_errors(prefix))
        return errors

    def _plane_errors(self, prefix: str) -> list[str]:
        try:
            check_plane_in_front(self.plane(), self.motion().to_trajectory(self.duration), self.duration)
        except ValidationError as exc:
            return [f"{prefix}{message}" for message in exc.errors]
        except SceneGeometryError as exc:
            return [f"{prefix}{exc}"]
        return []


@dataclass(slots=True)
class FlowSection(Validatable):
    """Velocity search for `flow`; `patch` = (x_min, y_min, x_max, y_max) crops the events."""

    half_width: float = DEFAULT_FLOW_HALF_WIDTH
    steps: int = DEFAULT_FLOW_STEPS
    refine: bool = True
    compare_modes: bool = False
    patch: list[float] | None = None

    def search(self) -> SearchGrid:
        return SearchGrid.symmetric([self.half_width] * 2, [self.steps] * 2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "half_width": self.half_width,
            "steps": self.steps,
            "refine": self.refine,
            "compare_modes": self.compare_modes,
            "patch": list(self.patch) if self.patch is not None else None,
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if not self.half_width > 0.0:
            errors.append(f"{prefix}Search half width must be positive, got {self.half_width}.")
        if self.steps < 2:
            errors.append(f"{prefix}Search needs at least 2 steps per axis, got {self.steps}.")
        patch: list[float] | None = self.patch
        if patch is not None and (len(patch) != 4 or patch[0] >= patch[2] or patch[1] >= patch[3]):
            errors.append(f"{prefix}Patch must be [x_min, y_min, x_max, y_max] with min < max.")
        return errors


@dataclass(slots=True)
class RotationSection(Validatable):
    """Sliding-window settings for `rotate`."""

    window: int = DEFAULT_WINDOW_EVENTS
    stride: int | None = None
    warm_start: bool = True
    max_iter: int = DEFAULT_TRACKING_ITERATIONS
    f_rtol: float = DEFAULT_TRACKING_RTOL
    omega0: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    subinterval: float = DEFAULT_SUBINTERVAL

    def tracking(self, accumulation: AccumulationSection) -> TrackingConfig:
        return TrackingConfig(
            window=self.window,
            stride=self.stride,
            warm_start=self.warm_start,
            mode=accumulation.mode,
            splat=accumulation.splat,
            max_iter=self.max_iter,
            f_rtol=self.f_rtol,
            omega0=(self.omega0[0], self.omega0[1], self.omega0[2]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "window": self.window,
            "stride": self.stride,
            "warm_start": self.warm_start,
            "max_iter": self.max_iter,
            "f_rtol": self.f_rtol,
            "omega0": list(self.omega0),
            "subinterval": self.subinterval,
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = self.tracking(AccumulationSection()).validate(prefix)
        if not self.subinterval > 0.0:
            errors.append(f"{prefix}Evaluation subinterval must be positive, got {self.subinterval}.")
        return errors


@dataclass(slots=True)
class DepthSection(Validatable):
    """Plane-sweep settings for `depth`; `counts` adds a depth-versus-event-count study."""

    z_min: float = DEFAULT_DEPTH_RANGE[0]
    z_max: float = DEFAULT_DEPTH_RANGE[1]
    z_steps: int = DEFAULT_DEPTH_STEPS
    patch_size: int = DEFAULT_PATCH_SIZE
    patch_center: list[int] | None = None
    block_size: int = DEFAULT_ADAPTIVE_BLOCK
    offset: float = 0.0
    median_size: int = DEFAULT_MEDIAN_SIZE
    counts: list[int] = field(default_factory=list[int])
    reference_time: float | None = None
    truth_depth: float | None = None

    @property
    def z_range(self) -> tuple[float, float]:
        return (self.z_min, self.z_max)

    def to_dict(self) -> dict[str, Any]:
        return {
            "z_min": self.z_min,
            "z_max": self.z_max,
            "z_steps": self.z_steps,
            "patch_size": self.patch_size,
            "patch_center": list(self.patch_center) if self.patch_center is not None else None,
            "block_size": self.block_size,
            "offset": self.offset,
            "median_size": self.median_size,
            "counts": list(self.counts),
            "reference_time": self.reference_time,
            "truth_depth": self.truth_depth,
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if not 0.0 < self.z_min < self.z_max:
            errors.append(f"{prefix}Depth range must satisfy 0 < z_min < z_max, got [{self.z_min}, {self.z_max}].")
        if self.z_steps < 2:
            errors.append(f"{prefix}Depth sweep needs at least 2 samples, got {self.z_steps}.")
        windows: dict[str, int] = {
            "patch_size": self.patch_size,
            "block_size": self.block_size,
            "median_size": self.median_size,
        }
        for name, size in windows.items():
            if size < 1 or size % 2 == 0:
                errors.append(f"{prefix}{name} must be a positive odd number, got {size}.")
        if self.offset < 0.0:
            errors.append(f"{prefix}Adaptive-threshold offset must be non-negative, got {self.offset}.")
        if self.patch_center is not None and len(self.patch_center) != 2:
            errors.append(f"{prefix}Patch centre must be [column, row].")
        if any(count < 0 for count in self.counts):
            errors.append(f"{prefix}Event counts must be non-negative.")
        if self.truth_depth is not None and not self.truth_depth > 0.0:
            errors.append(f"{prefix}Known scene depth must be positive, got {self.truth_depth}.")
        return errors


@dataclass(slots=True)
class HomographySection(Validatable):
    """Window and starting point for `homog`; `track` estimates every window instead of the first."""

    window: int = DEFAULT_HOMOGRAPHY_WINDOW
    max_iter: int = DEFAULT_MAX_ITERATIONS
    track: bool = False
    omega0: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    v_over_d0: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    normal0: list[float] = field(default_factory=lambda: [0.0, 0.0, -1.0])

    def theta0(self) -> HomographyParams:
        return HomographyParams.from_normal(self.omega0, self.v_over_d0, self.normal0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "window": self.window,
            "max_iter": self.max_iter,
            "track": self.track,
            "omega0": list(self.omega0),
            "v_over_d0": list(self.v_over_d0),
            "normal0": list(self.normal0),
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.window < 1:
            errors.append(f"{prefix}Window must hold at least one event, got {self.window}.")
        if self.max_iter < 0:
            errors.append(f"{prefix}Iteration limit must be non-negative, got {self.max_iter}.")
        if not np.linalg.norm(self.normal0) > 0.0:
            errors.append(f"{prefix}Starting plane normal must be non-zero.")
        return errors


@dataclass(slots=True)
class RunConfig(Validatable):
    """Everything one CLI run needs; echoed to `run.json` so the run can be repeated."""

    command: str = "synth"
    events: Path | None = None
    calibration: Path | None = None
    poses: Path | None = None
    raster: Path | None = None
    output: Path | None = None
    threads: int = field(default_factory=default_threads)
    relative_time: bool = False
    accumulation: AccumulationSection = field(default_factory=AccumulationSection)
    synth: SynthSection = field(default_factory=SynthSection)
    flow: FlowSection = field(default_factory=FlowSection)
    rotation: RotationSection = field(default_factory=RotationSection)
    depth: DepthSection = field(default_factory=DepthSection)
    homography: HomographySection = field(default_factory=HomographySection)

    def required_inputs(self) -> dict[str, Path | None]:
        """Input files the command reads, by config key."""
        if self.command == "synth":
            return {}
        if self.command == "render":
            return {"raster": self.raster}
        inputs: dict[str, Path | None] = {"events": self.events, "calibration": self.calibration}
        if self.command == "depth":
            inputs["poses"] = self.poses
        return inputs

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "events": _path_text(self.events),
            "calibration": _path_text(self.calibration),
            "poses": _path_text(self.poses),
            "raster": _path_text(self.raster),
            "output": _path_text(self.output),
            "threads": self.threads,
            "relative_time": self.relative_time,
            "accumulation": self.accumulation.to_dict(),
            "synth": self.synth.to_dict(),
            "flow": self.flow.to_dict(),
            "rotation": self.rotation.to_dict(),
            "depth": self.depth.to_dict(),
            "homography": self.homography.to_dict(),
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.command not in COMMANDS:
            errors.append(f"{prefix}Unknown command '{self.command}'; expected one of {', '.join(COMMANDS)}.")
        if self.threads < 1:
            errors.append(f"{prefix}Thread count must be at least 1, got {self.threads}.")
        for key, path in self.required_inputs().items():
            if path is None:
                errors.append(f"{prefix}Command '{self.command}' needs an input for '{key}'.")
            elif not path.is_file():
                errors.append(f"{prefix}Input '{key}' does not exist: {path}")
        errors.extend(self.accumulation.validate(f"{prefix}accumulation: "))
        sections: dict[str, Validatable] = {
            "synth": self.synth,
            "flow": self.flow,
            "rotate": self.rotation,
            "depth": self.depth,
            "homog": self.homography,
        }
        if self.command in sections:
            errors.extend(sections[self.command].validate(f"{prefix}{self.command}: "))
        return errors


def _path_text(path: Path | None) -> str | None:
    return str(path) if path is not None else None


def load_run_config(path: Path) -> RunConfig:
    """Read a JSON file from disk and create a `RunConfig`."""
    return run_config_from_mapping(read_config_mapping(path))


def read_config_mapping(path: Path) -> dict[str, Any]:
    """Parse a JSON configuration document into a plain dictionary."""
    raw_data: Any = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw_data, Mapping):
        raise ValueError("Top-level JSON document must be an object.")
    return dict(cast(JSONMapping, raw_data))


def merge_mappings(base: JSONMapping, overrides: JSONMapping) -> dict[str, Any]:
    """Recursively overlay `overrides` on `base`; `None` overrides leave the base value."""
    merged: dict[str, Any] = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        current: Any = merged.get(key)
        if isinstance(value, Mapping):
            nested: JSONMapping = cast(JSONMapping, current) if isinstance(current, Mapping) else {}
            merged[key] = merge_mappings(nested, cast(JSONMapping, value))
        else:
            merged[key] = value
    return merged


def run_config_from_mapping(config: JSONMapping) -> RunConfig:
    """Build a RunConfig from the parsed configuration mapping; missing keys keep their defaults."""
    run: RunConfig = RunConfig()
    run.command = str(config.get("command", run.command)).strip().lower()
    run.events = _optional_path(config, "events")
    run.calibration = _optional_path(config, "calibration")
    run.poses = _optional_path(config, "poses")
    run.raster = _optional_path(config, "raster")
    run.output = _optional_path(config, "output")
    run.threads = _require_int(config, "threads", run.threads, context="run")
    run.relative_time = _require_bool(config, "relative_time", run.relative_time, context="run")
    run.accumulation = _parse_accumulation(_section(config, "accumulation"))
    run.synth = _parse_synth(_section(config, "synth"))
    run.flow = _parse_flow(_section(config, "flow"))
    run.rotation = _parse_rotation(_section(config, "rotation"))
    run.depth = _parse_depth(_section(config, "depth"))
    run.homography = _parse_homography(_section(config, "homography"))
    return run


def _section(config: JSONMapping, key: str) -> JSONMapping:
    value: Any = config.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ValueError(f"'{key}' section must be an object.")
    return normalize_mapping(value)


def _parse_accumulation(entry: JSONMapping) -> AccumulationSection:
    section: AccumulationSection = AccumulationSection()
    section.mode = _parse_enum(AccumulationMode, entry.get("mode"), section.mode, context="accumulation mode")
    section.splat = _parse_enum(SplatKind, entry.get("splat"), section.splat, context="splat kind")
    section.negative = _require_bool(entry, "negative", section.negative, context="accumulation")
    return section


def _parse_synth(entry: JSONMapping) -> SynthSection:
    """
    Convert the synth section into a SynthSection.

    Args:
        entry: The dictionary representing the synth configuration.

    Returns:
        A populated SynthSection object.
    """
    context: str = "synth"
    section: SynthSection = SynthSection()
    section.problem = _parse_enum(Problem, entry.get("problem"), section.problem, context="synthetic problem")
    section.seed = _require_int(entry, "seed", section.seed, context=context)
    section.width = _require_int(entry, "width", section.width, context=context)
    section.height = _require_int(entry, "height", section.height, context=context)
    section.focal = _require_float(entry, "focal", section.focal, context=context)
    section.rate = _require_float(entry, "rate", section.rate, context=context)
    section.noise_sigma = _require_float(entry, "noise_sigma", section.noise_sigma, context=context)
    section.jitter = _require_float(entry, "jitter", section.jitter, context=context)
    section.duration = _require_float(entry, "duration", section.duration, context=context)
    section.density = _require_float(entry, "density", section.density, context=context)
    section.velocity = _require_vector(entry, "velocity", section.velocity, 2, context=context)
    section.omega = _require_vector(entry, "omega", section.omega, 3, context=context)
    section.profile_breaks = _require_vector(entry, "profile_breaks", section.profile_breaks, None, context=context)
    rows: list[Any] = _require_list(entry, "profile_omegas", context=context)
    section.profile_omegas = [_as_vector(row, 3, f"'profile_omegas' rows in {context}") for row in rows]
    section.planar_omega = _require_vector(entry, "planar_omega", section.planar_omega, 3, context=context)
    section.linear_velocity = _require_vector(entry, "linear_velocity", section.linear_velocity, 3, context=context)
    section.plane_normal = _require_vector(entry, "plane_normal", section.plane_normal, 3, context=context)
    section.plane_depth = _require_float(entry, "plane_depth", section.plane_depth, context=context)
    return section


def _parse_flow(entry: JSONMapping) -> FlowSection:
    context: str = "flow"
    section: FlowSection = FlowSection()
    section.half_width = _require_float(entry, "half_width", section.half_width, context=context)
    section.steps = _require_int(entry, "steps", section.steps, context=context)
    section.refine = _require_bool(entry, "refine", section.refine, context=context)
    section.compare_modes = _require_bool(entry, "compare_modes", section.compare_modes, context=context)
    if entry.get("patch") is not None:
        section.patch = _require_vector(entry, "patch", [], 4, context=context)
    return section


def _parse_rotation(entry: JSONMapping) -> RotationSection:
    context: str = "rotation"
    section: RotationSection = RotationSection()
    section.window = _require_int(entry, "window", section.window, context=context)
    if entry.get("stride") is not None:
        section.stride = _require_int(entry, "stride", 0, context=context)
    section.warm_start = _require_bool(entry, "warm_start", section.warm_start, context=context)
    section.max_iter = _require_int(entry, "max_iter", section.max_iter, context=context)
    section.f_rtol = _require_float(entry, "f_rtol", section.f_rtol, context=context)
    section.omega0 = _require_vector(entry, "omega0", section.omega0, 3, context=context)
    section.subinterval = _require_float(entry, "subinterval", section.subinterval, context=context)
    return section


def _parse_depth(entry: JSONMapping) -> DepthSection:
    context: str = "depth"
    section: DepthSection = DepthSection()
    section.z_min = _require_float(entry, "z_min", section.z_min, context=context)
    section.z_max = _require_float(entry, "z_max", section.z_max, context=context)
    section.z_steps = _require_int(entry, "z_steps", section.z_steps, context=context)
    section.patch_size = _require_int(entry, "patch_size", section.patch_size, context=context)
    if entry.get("patch_center") is not None:
        center: list[float] = _require_vector(entry, "patch_center", [], 2, context=context)
        section.patch_center = [int(round(value)) for value in center]
    section.block_size = _require_int(entry, "block_size", section.block_size, context=context)
    section.offset = _require_float(entry, "offset", section.offset, context=context)
    section.median_size = _require_int(entry, "median_size", section.median_size, context=context)
    section.counts = [int(value) for value in _require_vector(entry, "counts", [], None, context=context)]
    if entry.get("reference_time") is not None:
        section.reference_time = _require_float(entry, "reference_time", 0.0, context=context)
    if entry.get("truth_depth") is not None:
        section.truth_depth = _require_float(entry, "truth_depth", 0.0, context=context)
    return section


def _parse_homography(entry: JSONMapping) -> HomographySection:
    context: str = "homography"
    section: HomographySection = HomographySection()
    section.window = _require_int(entry, "window", section.window, context=context)
    section.max_iter = _require_int(entry, "max_iter", section.max_iter, context=context)
    section.track = _require_bool(entry, "track", section.track, context=context)
    section.omega0 = _require_vector(entry, "omega0", section.omega0, 3, context=context)
    section.v_over_d0 = _require_vector(entry, "v_over_d0", section.v_over_d0, 3, context=context)
    section.normal0 = _require_vector(entry, "normal0", section.normal0, 3, context=context)
    return section


def _parse_enum(enum_cls: Any, value: Any, default: Any, *, context: str) -> Any:
    try:
        return coerce_enum(enum_cls, value, default=default)
    except ValueError as exc:
        choices: str = ", ".join(member.value for member in enum_cls)
        raise ValueError(f"Unsupported {context} '{value}'; expected one of {choices}.") from exc


def _optional_path(entry: JSONMapping, key: str) -> Path | None:
    value: Any = entry.get(key)
    if value is None or value == "":
        return None
    if not isinstance(value, (str, Path)):
        raise ValueError(f"Field '{key}' must be a path string.")
    return Path(value).expanduser()


def _require_float(entry: JSONMapping, key: str, default: float, *, context: str) -> float:
    """Fetch an optional numeric field or raise a ValueError with context."""
    value: Any = entry.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"Field '{key}' in {context} must be a number")
    return float(value)


def _require_int(entry: JSONMapping, key: str, default: int, *, context: str) -> int:
    value: Any = entry.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ValueError(f"Field '{key}' in {context} must be an integer")
    return value


def _require_bool(entry: JSONMapping, key: str, default: bool, *, context: str) -> bool:
    value: Any = entry.get(key, default)
    if not isinstance(value, bool):
        raise ValueError(f"Field '{key}' in {context} must be true or false")
    return value


def _require_list(entry: JSONMapping, key: str, *, context: str) -> list[Any]:
    value: Any = entry.get(key, [])
    if not isinstance(value, ABCSequence) or isinstance(value, (str, bytes)):
        raise ValueError(f"Field '{key}' in {context} must be a list")
    return list(cast(ABCSequence[Any], value))


def _as_vector(value: Any, size: int | None, context: str) -> list[float]:
    if not isinstance(value, ABCSequence) or isinstance(value, (str, bytes)):
        raise ValueError(f"{context} must be a list of numbers")
    items: list[Any] = list(cast(ABCSequence[Any], value))
    if size is not None and len(items) != size:
        raise ValueError(f"{context} must hold {size} numbers, got {len(items)}")
    if any(isinstance(item, bool) or not isinstance(item, (int, float)) for item in items):
        raise ValueError(f"{context} must contain only numbers")
    return [float(item) for item in items]


def _require_vector(entry: JSONMapping, key: str, default: list[float], size: int | None, *, context: str) -> list[float]:
    if key not in entry or entry[key] is None:
        return list(default)
    return _as_vector(entry[key], size, f"Field '{key}' in {context}")


__all__: list[str] = [
    "AccumulationSection",
    "COMMANDS",
    "DepthSection",
    "FlowSection",
    "HomographySection",
    "RotationSection",
    "RunConfig",
    "SynthSection",
    "load_run_config",
    "merge_mappings",
    "read_config_mapping",
    "run_config_from_mapping",
]
