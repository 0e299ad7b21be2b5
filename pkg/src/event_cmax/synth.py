"""
Synthetic event generators with exact ground truth.

Scenes are sets of straight edge segments. Every edge is sampled at points one pixel apart
(in the reference image) and each sample point fires one event per `1 / rate` pixels it
travels across the edge, so the number of events grows with the amount of apparent motion
and a static scene produces none. Event positions are the exact projections of the sample
points at the event times; position noise and timestamp jitter are added afterwards.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

from .classes_references import SceneGeometryError
from .geometry import rotate_by_rotvecs
from .models import CameraIntrinsics, EventSlice, FlowParams, HomographyParams, Pose, PoseTrajectory
from .models.base import Validatable, frozen_array

DEFAULT_RATE: float = 1.0
DEFAULT_DENSITY: float = 6.0
DEFAULT_SAMPLE_SPACING: float = 1.0
DEFAULT_SEGMENT_LENGTH: tuple[float, float] = (10.0, 40.0)
MAX_STEP_TRAVEL: float = 0.25
COARSE_STEPS: int = 64
BLOCK_BUDGET: int = 1_000_000
TANGENT_FRACTION: float = 1e-2
POSE_SAMPLE_RATE: float = 1000.0
MIN_CAMERA_DEPTH: float = 1e-9
MIN_SCENE_RAY_Z: float = 0.05
SCENE_MARGIN: float = 5.0

Projector = Callable[[NDArray[np.float64], NDArray[np.float64]], tuple[NDArray[np.float64], NDArray[np.bool_]]]


@dataclass(slots=True)
class SynthConfig(Validatable):
    """Event-generation settings shared by all generators.

    `rate` is events per edge pixel per pixel of travel across the edge; `density` is the
    number of random segments per 100 x 100 px of scene area.
    """

    rate: float = DEFAULT_RATE
    noise_sigma: float = 0.0
    jitter: float = 0.0
    duration: float = 0.1
    seed: int = 0
    density: float = DEFAULT_DENSITY
    sample_spacing: float = DEFAULT_SAMPLE_SPACING

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rate": self.rate,
            "noise_sigma": self.noise_sigma,
            "jitter": self.jitter,
            "duration": self.duration,
            "seed": self.seed,
            "density": self.density,
            "sample_spacing": self.sample_spacing,
        }

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if not self.rate > 0.0:
            errors.append(f"{prefix}Event rate must be positive, got {self.rate}.")
        if self.noise_sigma < 0.0:
            errors.append(f"{prefix}Pixel noise must be non-negative, got {self.noise_sigma}.")
        if self.jitter < 0.0:
            errors.append(f"{prefix}Timestamp jitter must be non-negative, got {self.jitter}.")
        if not self.duration > 0.0:
            errors.append(f"{prefix}Duration must be positive, got {self.duration}.")
        if not self.density > 0.0:
            errors.append(f"{prefix}Texture density must be positive, got {self.density}.")
        if not self.sample_spacing > 0.0:
            errors.append(f"{prefix}Edge sample spacing must be positive, got {self.sample_spacing}.")
        return errors


@dataclass(slots=True)
class EdgeScene(Validatable):
    """Straight edges in reference-image pixel coordinates, each with a brightness-step sign.

    `segments[i]` holds the two endpoints ((x0, y0), (x1, y1)); `bounds` is
    (x_min, y_min, x_max, y_max).
    """

    segments: NDArray[np.float64]
    signs: NDArray[np.int8]
    bounds: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        self.segments = frozen_array(np.asarray(self.segments, dtype=np.float64).reshape(-1, 2, 2))
        self.signs = frozen_array(np.ravel(self.signs), dtype=np.int8)
        self.bounds = (
            float(self.bounds[0]),
            float(self.bounds[1]),
            float(self.bounds[2]),
            float(self.bounds[3]),
        )
        self.assert_valid()

    @classmethod
    def from_segments(
        cls,
        segments: ArrayLike,
        signs: ArrayLike | None = None,
        bounds: tuple[float, float, float, float] | None = None,
    ) -> "EdgeScene":
        """Scene from explicit segments; bounds default to the segments' bounding box."""
        array: NDArray[np.float64] = np.asarray(segments, dtype=np.float64).reshape(-1, 2, 2)
        sign_array: NDArray[np.int8] = (
            np.ones(array.shape[0], dtype=np.int8) if signs is None else np.asarray(signs, dtype=np.int8)
        )
        if bounds is None:
            flat: NDArray[np.float64] = array.reshape(-1, 2)
            bounds = (
                float(flat[:, 0].min()),
                float(flat[:, 1].min()),
                float(flat[:, 0].max()),
                float(flat[:, 1].max()),
            )
        return cls(segments=array, signs=sign_array, bounds=bounds)

    @classmethod
    def random(
        cls,
        bounds: tuple[float, float, float, float],
        density: float,
        rng: np.random.Generator,
        length_range: tuple[float, float] = DEFAULT_SEGMENT_LENGTH,
    ) -> "EdgeScene":
        """Segments with uniform centres, orientations and lengths, clipped into `bounds`."""
        x_min, y_min, x_max, y_max = bounds
        area: float = (x_max - x_min) * (y_max - y_min)
        count: int = max(1, round(density * area / 1e4))
        centres: NDArray[np.float64] = np.column_stack(
            (rng.uniform(x_min, x_max, count), rng.uniform(y_min, y_max, count))
        )
        angles: NDArray[np.float64] = rng.uniform(0.0, math.pi, count)
        lengths: NDArray[np.float64] = rng.uniform(length_range[0], length_range[1], count)
        half: NDArray[np.float64] = 0.5 * lengths[:, None] * np.column_stack((np.cos(angles), np.sin(angles)))
        starts: NDArray[np.float64] = centres - half
        ends: NDArray[np.float64] = centres + half
        low: NDArray[np.float64] = np.array([x_min, y_min])
        high: NDArray[np.float64] = np.array([x_max, y_max])
        segments: NDArray[np.float64] = np.stack((np.clip(starts, low, high), np.clip(ends, low, high)), axis=1)
        signs: NDArray[np.int8] = np.where(rng.random(count) < 0.5, -1, 1).astype(np.int8)
        return cls(segments=segments, signs=signs, bounds=bounds)

    def __len__(self) -> int:
        return int(self.segments.shape[0])

    @property
    def lengths(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1)

    @property
    def density(self) -> float:
        """Segments per 100 x 100 px of scene area."""
        x_min, y_min, x_max, y_max = self.bounds
        area: float = max((x_max - x_min) * (y_max - y_min), 1e-12)
        return len(self) * 1e4 / area

    def sample(
        self, spacing: float, rng: np.random.Generator
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.int8]]:
        """Points along every segment about `spacing` px apart.

        Returns (points (P, 2), unit tangents (P, 2), signs (P,)). Each segment gets one random
        offset so samples do not sit on the pixel lattice.
        """
        lengths: NDArray[np.float64] = self.lengths
        keep: NDArray[np.bool_] = lengths > 0.0
        counts: NDArray[np.intp] = np.where(keep, np.maximum(1, np.floor(lengths / spacing)), 0).astype(np.intp)
        offsets: NDArray[np.float64] = rng.random(len(self))
        segment_index: NDArray[np.intp] = np.repeat(np.arange(len(self)), counts)
        first_sample: NDArray[np.intp] = np.repeat(np.cumsum(counts) - counts, counts)
        local: NDArray[np.float64] = np.arange(int(counts.sum())) - first_sample + offsets[segment_index]
        fraction: NDArray[np.float64] = local / counts[segment_index]
        starts: NDArray[np.float64] = self.segments[segment_index, 0]
        directions: NDArray[np.float64] = self.segments[segment_index, 1] - starts
        points: NDArray[np.float64] = starts + fraction[:, None] * directions
        tangents: NDArray[np.float64] = directions / lengths[segment_index][:, None]
        return points, tangents, self.signs[segment_index]

    def to_dict(self) -> dict[str, Any]:
        return {"segments": self.segments.tolist(), "signs": self.signs.tolist(), "bounds": list(self.bounds)}

    def describe(self) -> str:
        return f"EdgeScene(segments={len(self)}, density={self.density:.2f}/100px^2)"

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.signs.shape[0] != self.segments.shape[0]:
            errors.append(f"{prefix}Every segment needs exactly one sign.")
        if self.signs.size and not np.all(np.abs(self.signs) == 1):
            errors.append(f"{prefix}Edge signs must be -1 or +1.")
        x_min, y_min, x_max, y_max = self.bounds
        if not (x_min < x_max and y_min < y_max):
            errors.append(f"{prefix}Scene bounds {self.bounds} are empty.")
        elif self.segments.size:
            flat: NDArray[np.float64] = self.segments.reshape(-1, 2)
            tolerance: float = 1e-9
            inside: bool = bool(
                np.all(flat[:, 0] >= x_min - tolerance)
                and np.all(flat[:, 0] <= x_max + tolerance)
                and np.all(flat[:, 1] >= y_min - tolerance)
                and np.all(flat[:, 1] <= y_max + tolerance)
            )
            if not inside:
                errors.append(f"{prefix}Edge endpoints must lie within the scene bounds {self.bounds}.")
        return errors


@dataclass(slots=True)
class OmegaProfile(Validatable):
    """Piecewise-constant warp angular velocity: `omegas[k]` holds on [breaks[k], breaks[k + 1]).

    The camera-from-world rotation integrates it as R(t) = exp(w_k^ (t - t_k)) R(t_k) with
    R(breaks[0]) = identity; the camera-to-world body rate is therefore -omega.
    """

    breaks: NDArray[np.float64]
    omegas: NDArray[np.float64]
    _starts: Rotation | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.breaks = frozen_array(np.ravel(self.breaks))
        self.omegas = frozen_array(np.asarray(self.omegas, dtype=np.float64).reshape(-1, 3))
        self.assert_valid()
        starts: list[Rotation] = [Rotation.identity()]
        for index in range(self.omegas.shape[0] - 1):
            span: float = float(self.breaks[index + 1] - self.breaks[index])
            starts.append(Rotation.from_rotvec(self.omegas[index] * span) * starts[-1])
        self._starts = Rotation.concatenate(starts)

    @classmethod
    def constant(cls, omega: ArrayLike, duration: float) -> "OmegaProfile":
        return cls(breaks=np.array([0.0, duration]), omegas=np.asarray(omega, dtype=np.float64).reshape(1, 3))

    @property
    def duration(self) -> float:
        return float(self.breaks[-1] - self.breaks[0])

    @property
    def peak(self) -> float:
        """Largest angular speed (rad/s)."""
        return float(np.linalg.norm(self.omegas, axis=1).max())

    def _segment(self, times: NDArray[np.float64]) -> NDArray[np.intp]:
        index: NDArray[np.intp] = np.searchsorted(self.breaks, times, side="right") - 1
        return np.clip(index, 0, self.omegas.shape[0] - 1)

    def omega_at(self, t: ArrayLike) -> NDArray[np.float64]:
        """Ground-truth warp angular velocity (N, 3) at the given times."""
        times: NDArray[np.float64] = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return np.array(self.omegas[self._segment(times)])

    def camera_from_world(self, t: ArrayLike) -> Rotation:
        times: NDArray[np.float64] = np.atleast_1d(np.asarray(t, dtype=np.float64))
        index: NDArray[np.intp] = self._segment(times)
        elapsed: NDArray[np.float64] = times - self.breaks[index]
        starts: Rotation = self._starts if self._starts is not None else Rotation.identity(self.omegas.shape[0])
        return Rotation.from_rotvec(self.omegas[index] * elapsed[:, None]) * starts[index]

    def to_trajectory(self, sample_rate: float = POSE_SAMPLE_RATE) -> PoseTrajectory:
        """Camera-to-world poses sampled at `sample_rate` plus every break, exact under slerp."""
        count: int = max(2, math.ceil(self.duration * sample_rate) + 1)
        times: NDArray[np.float64] = np.unique(
            np.concatenate((np.linspace(self.breaks[0], self.breaks[-1], count), self.breaks))
        )
        return PoseTrajectory.from_rotations(times, self.camera_from_world(times).inv())

    def to_dict(self) -> dict[str, Any]:
        return {"breaks": self.breaks.tolist(), "omegas": self.omegas.tolist()}

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if self.breaks.size != self.omegas.shape[0] + 1 or self.omegas.shape[0] == 0:
            errors.append(f"{prefix}An angular-velocity profile needs one more break than pieces.")
            return errors
        if not np.all(np.diff(self.breaks) > 0.0):
            errors.append(f"{prefix}Profile breaks must be strictly increasing.")
        if not np.all(np.isfinite(self.omegas)):
            errors.append(f"{prefix}Profile angular velocities must be finite.")
            return errors
        angles: NDArray[np.float64] = np.linalg.norm(self.omegas, axis=1) * np.diff(self.breaks)
        if np.any(angles >= math.pi):
            errors.append(f"{prefix}Each piece must rotate by less than pi (largest: {float(angles.max()):.4f} rad).")
        return errors


@dataclass(slots=True)
class ConstantMotion(Validatable):
    """Constant camera angular velocity `omega` (rad/s) and velocity `v` (m/s) from a reference frame at t = 0.

    A point X of the reference frame is seen at time t as exp(w^ t) (X - v t).
    """

    omega: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    v: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        self.omega = frozen_array(self.omega, shape=(3,))
        self.v = frozen_array(self.v, shape=(3,))
        self.assert_valid()

    @property
    def is_static(self) -> bool:
        return not (np.any(self.omega) or np.any(self.v))

    def camera_points(self, points: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
        return rotate_by_rotvecs(t[:, None] * self.omega[None, :], points - t[:, None] * self.v[None, :])

    def to_trajectory(self, duration: float, sample_rate: float = POSE_SAMPLE_RATE) -> PoseTrajectory:
        """Camera-to-world poses R = exp(-w^ t), p = v t; exact under slerp and lerp."""
        count: int = max(2, math.ceil(duration * sample_rate) + 1)
        times: NDArray[np.float64] = np.linspace(0.0, duration, count)
        rotations: Rotation = Rotation.from_rotvec(-times[:, None] * self.omega[None, :])
        return PoseTrajectory.from_rotations(times, rotations, times[:, None] * self.v[None, :])

    def to_dict(self) -> dict[str, Any]:
        return {"omega": self.omega.tolist(), "v": self.v.tolist()}

    def validate(self, prefix: str = "") -> list[str]:
        if not (np.all(np.isfinite(self.omega)) and np.all(np.isfinite(self.v))):
            return [f"{prefix}Motion must be finite."]
        return []


@dataclass(slots=True)
class Plane(Validatable):
    """Plane n^T X + d = 0 in world coordinates (the reference camera frame for `ConstantMotion`)."""

    normal: NDArray[np.float64]
    d: float

    def __post_init__(self) -> None:
        normal: NDArray[np.float64] = np.asarray(self.normal, dtype=np.float64).reshape(3)
        norm: float = float(np.linalg.norm(normal))
        self.normal = frozen_array(normal / norm if norm > 0.0 else normal)
        self.d = float(self.d)
        self.assert_valid()

    @classmethod
    def fronto_parallel(cls, depth: float) -> "Plane":
        """The plane Z = depth."""
        return cls(normal=np.array([0.0, 0.0, -1.0]), d=depth)

    def to_dict(self) -> dict[str, Any]:
        return {"normal": self.normal.tolist(), "d": self.d}

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if not np.all(np.isfinite(self.normal)) or not math.isclose(float(np.linalg.norm(self.normal)), 1.0):
            errors.append(f"{prefix}Plane normal must be a finite non-zero vector.")
        if not math.isfinite(self.d):
            errors.append(f"{prefix}Plane offset must be finite.")
        return errors


@dataclass(slots=True)
class RotationTruth:
    """Ground truth of a rotation scene: the angular-velocity profile and the exported poses."""

    profile: OmegaProfile
    trajectory: PoseTrajectory

    def omega_at(self, t: ArrayLike) -> NDArray[np.float64]:
        return self.profile.omega_at(t)

    def to_dict(self) -> dict[str, Any]:
        return {"problem": "rotation", "omega_profile": self.profile.to_dict(), "peak_rad_s": self.profile.peak}


@dataclass(slots=True)
class PlanarTruth:
    """Ground truth of a planar scene: plane, camera trajectory and, for constant motion, its velocities."""

    plane: Plane
    trajectory: PoseTrajectory
    motion: ConstantMotion | None = None

    def homography_at(self, t_ref: float = 0.0) -> HomographyParams:
        """The 8-DOF parameters relative to the camera frame at `t_ref` (constant motion only)."""
        if self.motion is None:
            raise ValueError("Homography ground truth exists only for constant-velocity motion.")
        omega: NDArray[np.float64] = self.motion.omega
        rotation: NDArray[np.float64] = Rotation.from_rotvec(omega * t_ref).as_matrix()
        normal: NDArray[np.float64] = rotation @ self.plane.normal
        d: float = self.plane.d + float(self.plane.normal @ self.motion.v) * t_ref
        v_over_d: NDArray[np.float64] = (rotation @ self.motion.v) / d
        return HomographyParams.from_normal(omega, v_over_d, normal).canonical()

    def depth_at(self, t: float) -> float:
        """Depth of the plane along the optical axis of the camera at time `t`."""
        pose: Pose = self.trajectory.interpolate(t)
        axis: NDArray[np.float64] = pose.rotation_matrix()[:, 2]
        denominator: float = float(self.plane.normal @ axis)
        if abs(denominator) < MIN_CAMERA_DEPTH:
            return math.inf
        return -(float(self.plane.normal @ pose.translation) + self.plane.d) / denominator

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"problem": "planar", "plane": self.plane.to_dict()}
        if self.motion is not None:
            data["motion"] = self.motion.to_dict()
            data["homography"] = self.homography_at(0.0).to_dict()
        start: float = self.trajectory.t_start
        axis: NDArray[np.float64] = self.trajectory.pose_at_index(0).rotation_matrix()[:, 2]
        if abs(abs(float(self.plane.normal @ axis)) - 1.0) < 1e-9:
            data["reference_depth"] = self.depth_at(start)
        return data


def _inside_sensor(pixels: NDArray[np.float64], camera: CameraIntrinsics) -> NDArray[np.bool_]:
    return (
        (pixels[..., 0] >= -0.5)
        & (pixels[..., 0] < camera.width - 0.5)
        & (pixels[..., 1] >= -0.5)
        & (pixels[..., 1] < camera.height - 0.5)
    )


def _project_grid(
    project: Projector, points: NDArray[np.float64], times: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """Project every point at every time; returns arrays shaped (T, P, 2) and (T, P)."""
    count: int = points.shape[0]
    pixels, valid = project(np.tile(points, (times.size, 1)), np.repeat(times, count))
    return pixels.reshape(times.size, count, 2), valid.reshape(times.size, count)


def _time_steps(project: Projector, points: NDArray[np.float64], duration: float) -> int:
    coarse: NDArray[np.float64] = np.linspace(0.0, duration, COARSE_STEPS + 1)
    pixels, valid = _project_grid(project, points, coarse)
    moved: NDArray[np.float64] = np.linalg.norm(np.diff(pixels, axis=0), axis=2)
    moved = np.where(valid[1:] & valid[:-1], moved, 0.0)
    largest: float = float(moved.max()) if moved.size else 0.0
    return COARSE_STEPS * max(1, math.ceil(largest / MAX_STEP_TRAVEL))


def _emit_events(
    points: NDArray[np.float64],
    tangents: NDArray[np.float64],
    signs: NDArray[np.int8],
    project: Projector,
    camera: CameraIntrinsics,
    config: SynthConfig,
    rng: np.random.Generator,
) -> EventSlice:
    """Fire events whenever a sample point's accumulated normal travel crosses a multiple of 1 / rate."""
    count: int = points.shape[0]
    if count == 0:
        return EventSlice()
    level_rate: float = config.rate * config.sample_spacing
    phases: NDArray[np.float64] = rng.random(count)
    steps: int = _time_steps(project, points, config.duration)
    grid: NDArray[np.float64] = np.linspace(0.0, config.duration, steps + 1)
    block: int = max(1, BLOCK_BUDGET // count)
    travelled: NDArray[np.float64] = np.zeros(count)
    tangent_points: NDArray[np.float64] = points + TANGENT_FRACTION * tangents

    event_times: list[NDArray[np.float64]] = []
    event_sources: list[NDArray[np.intp]] = []
    event_polarity: list[NDArray[np.int8]] = []
    for first in range(0, steps, block):
        times: NDArray[np.float64] = grid[first : min(first + block, steps) + 1]
        pixels, valid = _project_grid(project, points, times)
        ahead, ahead_valid = _project_grid(project, tangent_points, times)
        visible: NDArray[np.bool_] = valid & ahead_valid & _inside_sensor(pixels, camera)
        along: NDArray[np.float64] = ahead - pixels
        lengths: NDArray[np.float64] = np.linalg.norm(along, axis=2)
        normals: NDArray[np.float64] = np.stack((-along[..., 1], along[..., 0]), axis=2) / np.where(
            lengths > 0.0, lengths, 1.0
        )[..., None]
        across: NDArray[np.float64] = np.sum(np.diff(pixels, axis=0) * normals[:-1], axis=2)
        increments: NDArray[np.float64] = np.where(visible[:-1] & visible[1:], np.abs(across), 0.0)
        cumulative: NDArray[np.float64] = np.vstack((travelled, travelled + np.cumsum(increments, axis=0)))
        scaled: NDArray[np.float64] = level_rate * cumulative + phases[None, :]
        levels: NDArray[np.int64] = np.floor(scaled).astype(np.int64)
        fired: NDArray[np.int64] = np.diff(levels, axis=0)
        step_index, source = np.nonzero(fired)
        if step_index.size:
            repeats: NDArray[np.int64] = fired[step_index, source]
            step_index = np.repeat(step_index, repeats)
            source = np.repeat(source, repeats)
            within: NDArray[np.int64] = np.arange(step_index.size) - np.repeat(np.cumsum(repeats) - repeats, repeats)
            crossing: NDArray[np.float64] = levels[step_index, source] + 1 + within
            fraction: NDArray[np.float64] = (crossing - scaled[step_index, source]) / (
                level_rate * increments[step_index, source]
            )
            fraction = np.clip(fraction, 0.0, 1.0)
            event_times.append(times[step_index] + fraction * (times[step_index + 1] - times[step_index]))
            event_sources.append(source)
            event_polarity.append((np.sign(across[step_index, source]) * signs[source]).astype(np.int8))
        travelled = cumulative[-1]

    if not event_times:
        return EventSlice()
    t: NDArray[np.float64] = np.concatenate(event_times)
    sources: NDArray[np.intp] = np.concatenate(event_sources)
    polarity: NDArray[np.int8] = np.concatenate(event_polarity)
    positions, valid_positions = project(points[sources], t)
    if config.noise_sigma > 0.0:
        positions = positions + rng.normal(0.0, config.noise_sigma, positions.shape)
    if config.jitter > 0.0:
        t = np.clip(t + rng.normal(0.0, config.jitter, t.shape), 0.0, None)
    keep: NDArray[np.bool_] = valid_positions & _inside_sensor(positions, camera) & (polarity != 0)
    order: NDArray[np.intp] = np.argsort(t[keep], kind="stable")
    return EventSlice(
        t=t[keep][order],
        x=positions[keep, 0][order],
        y=positions[keep, 1][order],
        p=polarity[keep][order],
    )


def _sensor_bounds(camera: CameraIntrinsics) -> tuple[float, float, float, float]:
    return (-0.5, -0.5, camera.width - 0.5, camera.height - 0.5)


def gen_flow_scene(
    velocity: ArrayLike,
    camera: CameraIntrinsics,
    config: SynthConfig,
    scene: EdgeScene | None = None,
) -> tuple[EventSlice, FlowParams]:
    """
    Edges translating across the image plane at constant velocity v (px/s).

    The scene defaults to random segments covering the sensor. Event times run from 0 to
    `config.duration`, and x(t) = x(0) + v t for the noiseless event positions.
    """
    config.assert_valid()
    rng: np.random.Generator = config.rng()
    truth: FlowParams = FlowParams(v=np.asarray(velocity, dtype=np.float64))
    edges: EdgeScene = scene if scene is not None else EdgeScene.random(_sensor_bounds(camera), config.density, rng)
    points, tangents, signs = edges.sample(config.sample_spacing, rng)

    def project(where: NDArray[np.float64], t: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        return where + t[:, None] * truth.v[None, :], np.ones(t.size, dtype=bool)

    events: EventSlice = _emit_events(points, tangents, signs, project, camera, config, rng)
    logger.info(
        "Generated flow scene: {events} from {scene} at v={velocity}",
        events=events.describe(),
        scene=edges.describe(),
        velocity=truth.v.tolist(),
    )
    return events, truth


def _unit_depth_bounds(
    camera: CameraIntrinsics, rotations: Rotation
) -> tuple[float, float, float, float]:
    """Reference-pixel bounding box of the plane Z = 1 seen by the camera over all `rotations`."""
    corners: NDArray[np.float64] = np.array(
        [[-0.5, -0.5], [camera.width - 0.5, -0.5], [-0.5, camera.height - 0.5], [camera.width - 0.5, camera.height - 0.5]]
    )
    rays: NDArray[np.float64] = np.column_stack((camera.normalize(corners), np.ones(4)))
    seen: list[NDArray[np.float64]] = []
    for index in range(len(rotations)):
        world: NDArray[np.float64] = rotations[index].inv().apply(rays)
        if float(world[:, 2].min()) < MIN_SCENE_RAY_Z:
            raise SceneGeometryError("The camera turns too far away from the unit-depth scene plane.")
        seen.append(camera.denormalize(world[:, :2] / world[:, 2:3]))
    stacked: NDArray[np.float64] = np.vstack(seen)
    return (
        float(stacked[:, 0].min()) - SCENE_MARGIN,
        float(stacked[:, 1].min()) - SCENE_MARGIN,
        float(stacked[:, 0].max()) + SCENE_MARGIN,
        float(stacked[:, 1].max()) + SCENE_MARGIN,
    )


def gen_rotation_scene(
    omega: ArrayLike | OmegaProfile,
    camera: CameraIntrinsics,
    config: SynthConfig,
    scene: EdgeScene | None = None,
) -> tuple[EventSlice, RotationTruth]:
    """
    A camera rotating in front of edges on the plane Z = 1 of the initial camera frame.

    `omega` is either a constant warp angular velocity or an `OmegaProfile`; every piece must
    rotate by less than pi. Events obey x(t) ~ exp(w^ (t - t0)) x(t0), the forward form of the
    rotation warp, and the exported trajectory is camera-to-world.
    """
    config.assert_valid()
    rng: np.random.Generator = config.rng()
    profile: OmegaProfile = (
        omega if isinstance(omega, OmegaProfile) else OmegaProfile.constant(omega, config.duration)
    )
    if abs(profile.duration - config.duration) > 1e-12 or float(profile.breaks[0]) != 0.0:
        raise ValueError(
            f"The angular-velocity profile must span [0, {config.duration}], got "
            f"[{float(profile.breaks[0])}, {float(profile.breaks[-1])}]."
        )
    samples: NDArray[np.float64] = np.unique(
        np.concatenate((np.linspace(0.0, config.duration, COARSE_STEPS + 1), profile.breaks))
    )
    edges: EdgeScene = (
        scene
        if scene is not None
        else EdgeScene.random(_unit_depth_bounds(camera, profile.camera_from_world(samples)), config.density, rng)
    )
    pixels, tangents, signs = edges.sample(config.sample_spacing, rng)
    points: NDArray[np.float64] = np.column_stack((camera.normalize(pixels), np.ones(pixels.shape[0])))
    directions: NDArray[np.float64] = np.column_stack(
        (tangents[:, 0] / camera.fx, tangents[:, 1] / camera.fy, np.zeros(tangents.shape[0]))
    )

    def project(where: NDArray[np.float64], t: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        return _dehomogenize(profile.camera_from_world(t).apply(where), camera)

    events: EventSlice = _emit_events(points, directions, signs, project, camera, config, rng)
    truth: RotationTruth = RotationTruth(profile=profile, trajectory=profile.to_trajectory())
    logger.info(
        "Generated rotation scene: {events} from {scene}, peak {peak:.3f} rad/s",
        events=events.describe(),
        scene=edges.describe(),
        peak=profile.peak,
    )
    return events, truth


def _dehomogenize(
    camera_points: NDArray[np.float64], camera: CameraIntrinsics
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    z: NDArray[np.float64] = camera_points[:, 2]
    valid: NDArray[np.bool_] = z > MIN_CAMERA_DEPTH
    safe: NDArray[np.float64] = np.where(valid, z, 1.0)
    return camera.denormalize(camera_points[:, :2] / safe[:, None]), valid


def check_plane_in_front(plane: Plane, trajectory: PoseTrajectory, duration: float) -> None:
    """Raise `SceneGeometryError` unless the plane stays in front of the camera over [0, duration]."""
    times: NDArray[np.float64] = np.unique(
        np.concatenate(
            (
                np.linspace(0.0, duration, COARSE_STEPS + 1),
                trajectory.times[(trajectory.times >= 0.0) & (trajectory.times <= duration)],
            )
        )
    )
    rotations, centres = trajectory.interpolate_many(times)
    side: NDArray[np.float64] = centres @ plane.normal + plane.d
    if np.any(np.abs(side) < MIN_CAMERA_DEPTH) or np.any(np.sign(side) != np.sign(side[0])):
        raise SceneGeometryError("The camera crosses the scene plane.")
    axes: NDArray[np.float64] = rotations.apply(np.array([0.0, 0.0, 1.0]))
    facing: NDArray[np.float64] = axes @ plane.normal
    usable: NDArray[np.bool_] = np.abs(facing) > MIN_CAMERA_DEPTH
    depth: NDArray[np.float64] = np.where(usable, -side / np.where(usable, facing, 1.0), np.inf)
    if np.any(depth <= 0.0):
        raise SceneGeometryError("The scene plane lies behind the camera.")


def gen_planar_scene(
    motion: ConstantMotion | PoseTrajectory,
    plane: Plane,
    camera: CameraIntrinsics,
    config: SynthConfig,
    scene: EdgeScene | None = None,
    *,
    texture_margin: float = 20.0,
) -> tuple[EventSlice, PlanarTruth]:
    """
    Edges painted on a plane, observed by a moving camera.

    The texture is drawn in the image of the camera at t = 0 (grown by `texture_margin`
    pixels) and back-projected onto the plane. `motion` is a constant-velocity motion about
    the t = 0 camera frame or a camera-to-world trajectory covering [0, duration].

    Raises:
        SceneGeometryError: When the plane is behind the camera or the camera crosses it.
    """
    config.assert_valid()
    rng: np.random.Generator = config.rng()
    constant: ConstantMotion | None = motion if isinstance(motion, ConstantMotion) else None
    trajectory: PoseTrajectory = (
        motion.to_trajectory(config.duration) if isinstance(motion, ConstantMotion) else motion
    )
    trajectory.require_coverage(np.array([0.0, config.duration]), context="Synthetic scene")
    check_plane_in_front(plane, trajectory, config.duration)

    bounds: tuple[float, float, float, float] = (
        -0.5 - texture_margin,
        -0.5 - texture_margin,
        camera.width - 0.5 + texture_margin,
        camera.height - 0.5 + texture_margin,
    )
    edges: EdgeScene = scene if scene is not None else EdgeScene.random(bounds, config.density, rng)
    pixels, tangents, signs = edges.sample(config.sample_spacing, rng)
    start: Pose = trajectory.interpolate(0.0)
    start_rotation: NDArray[np.float64] = start.rotation_matrix()

    def back_project(where: NDArray[np.float64]) -> NDArray[np.float64]:
        rays: NDArray[np.float64] = np.column_stack((camera.normalize(where), np.ones(where.shape[0]))) @ start_rotation.T
        scale: NDArray[np.float64] = -(float(plane.normal @ start.translation) + plane.d) / (rays @ plane.normal)
        if np.any(~np.isfinite(scale)) or np.any(scale <= 0.0):
            raise SceneGeometryError("Part of the scene texture would lie behind the camera.")
        return start.translation[None, :] + scale[:, None] * rays

    points: NDArray[np.float64] = back_project(pixels)
    directions: NDArray[np.float64] = back_project(pixels + tangents) - points

    if constant is not None:

        def project(where: NDArray[np.float64], t: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
            return _dehomogenize(constant.camera_points(where, t), camera)

    else:

        def project(where: NDArray[np.float64], t: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
            rotations, centres = trajectory.interpolate_many(t)
            return _dehomogenize(rotations.inv().apply(where - centres), camera)

    events: EventSlice = _emit_events(points, directions, signs, project, camera, config, rng)
    truth: PlanarTruth = PlanarTruth(plane=plane, trajectory=trajectory, motion=constant)
    logger.info(
        "Generated planar scene: {events} from {scene} on plane n={normal}, d={d}",
        events=events.describe(),
        scene=edges.describe(),
        normal=plane.normal.tolist(),
        d=plane.d,
    )
    return events, truth


def translation_trajectory(
    baseline: Sequence[float], duration: float, sample_rate: float = POSE_SAMPLE_RATE
) -> PoseTrajectory:
    """Camera moving linearly from the origin to `baseline` (m) over `duration` without rotating."""
    return ConstantMotion(v=np.asarray(baseline, dtype=np.float64) / duration).to_trajectory(duration, sample_rate)


__all__: list[str] = [
    "ConstantMotion",
    "EdgeScene",
    "OmegaProfile",
    "PlanarTruth",
    "Plane",
    "RotationTruth",
    "SynthConfig",
    "gen_flow_scene",
    "gen_planar_scene",
    "gen_rotation_scene",
    "translation_trajectory",
]
