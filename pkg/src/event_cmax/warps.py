"""The four event warps and the warp-model objects used for accumulation and optimization.

Every warp maps event pixels observed at time t to the reference time (or reference view)
and returns a `WarpResult` whose `valid` mask flags points that could not be dehomogenized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Protocol

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from .classes_references import ParameterError
from .geometry import exp_so3, rotate_by_rotvecs
from .models import (
    CameraIntrinsics,
    DepthParams,
    EventSlice,
    FlowParams,
    HomographyParams,
    Pose,
    PoseTrajectory,
    RotationParams,
)
from .type_helpers import Problem

MIN_DEPTH_DENOMINATOR: float = 1e-9
SINGULAR_DETERMINANT: float = 1e-12

DEFAULT_FLOW_GRADIENT_STEP: float = 0.5
DEFAULT_ROTATION_GRADIENT_STEP: float = 1e-3
DEFAULT_HOMOGRAPHY_GRADIENT_STEP: float = 1e-3
ANGLE_SCALE: float = 0.05


@dataclass(slots=True)
class WarpResult:
    """Warped pixel positions (N, 2) and the mask of points that stayed in front of the camera."""

    points: NDArray[np.float64]
    valid: NDArray[np.bool_]

    @classmethod
    def all_valid(cls, points: NDArray[np.float64]) -> "WarpResult":
        return cls(points=points, valid=np.ones(points.shape[0], dtype=bool))

    def __len__(self) -> int:
        return int(self.points.shape[0])


def _as_points(points: ArrayLike) -> NDArray[np.float64]:
    return np.atleast_2d(np.asarray(points, dtype=np.float64)).reshape(-1, 2)


def _as_times(t: ArrayLike, count: int) -> NDArray[np.float64]:
    times: NDArray[np.float64] = np.asarray(t, dtype=np.float64)
    if times.ndim == 0:
        return np.full(count, float(times))
    return times.reshape(count)


def _dehomogenize(homogeneous: NDArray[np.float64], camera: CameraIntrinsics) -> WarpResult:
    z: NDArray[np.float64] = homogeneous[:, 2]
    valid: NDArray[np.bool_] = z > MIN_DEPTH_DENOMINATOR
    safe_z: NDArray[np.float64] = np.where(valid, z, 1.0)
    calibrated: NDArray[np.float64] = homogeneous[:, :2] / safe_z[:, None]
    return WarpResult(points=camera.denormalize(calibrated), valid=valid)


def _lift(points: NDArray[np.float64], camera: CameraIntrinsics) -> NDArray[np.float64]:
    calibrated: NDArray[np.float64] = camera.normalize(points)
    return np.column_stack((calibrated, np.ones(calibrated.shape[0])))


def warp_flow(points: ArrayLike, t: ArrayLike, t_ref: float, params: FlowParams) -> WarpResult:
    """x' = x - (t - t_ref) v."""
    pixels: NDArray[np.float64] = _as_points(points)
    dt: NDArray[np.float64] = _as_times(t, pixels.shape[0]) - t_ref
    return WarpResult.all_valid(pixels - dt[:, None] * params.v[None, :])


def warp_rotation(
    points: ArrayLike, t: ArrayLike, t_ref: float, params: RotationParams, camera: CameraIntrinsics
) -> WarpResult:
    """x' ~ exp(-w^ (t - t_ref)) x_bar, reprojected to pixels."""
    pixels: NDArray[np.float64] = _as_points(points)
    dt: NDArray[np.float64] = _as_times(t, pixels.shape[0]) - t_ref
    rotvecs: NDArray[np.float64] = -dt[:, None] * params.omega[None, :]
    rotated: NDArray[np.float64] = rotate_by_rotvecs(rotvecs, _lift(pixels, camera))
    return _dehomogenize(rotated, camera)


def homography_matrix(params: HomographyParams, dt: float) -> NDArray[np.float64]:
    """H(dt) = exp(w^ dt) (I + (v/d) dt n^T)."""
    rotation: NDArray[np.float64] = exp_so3(params.omega * dt)
    return rotation @ (np.eye(3) + np.outer(params.v_over_d * dt, params.normal))


def _inverse_homography_rows(
    lifted: NDArray[np.float64], dt: NDArray[np.float64], params: HomographyParams
) -> NDArray[np.float64]:
    """Apply H(dt_k)^-1 = (I - a n^T / (1 + n^T a)) R^T row by row with a = (v/d) dt_k."""
    normal: NDArray[np.float64] = params.normal
    a: NDArray[np.float64] = dt[:, None] * params.v_over_d[None, :]
    determinant: NDArray[np.float64] = 1.0 + a @ normal
    if determinant.size and float(np.min(np.abs(determinant))) < SINGULAR_DETERMINANT:
        raise ParameterError(
            f"Homography is singular (|det H| = {float(np.min(np.abs(determinant))):.3e}) for {params.to_dict()}."
        )
    unrotated: NDArray[np.float64] = rotate_by_rotvecs(-dt[:, None] * params.omega[None, :], lifted)
    projection: NDArray[np.float64] = unrotated @ normal
    return unrotated - a * (projection / determinant)[:, None]


def warp_homography(
    points: ArrayLike, t: ArrayLike, t_ref: float, params: HomographyParams, camera: CameraIntrinsics
) -> WarpResult:
    """x' ~ H^-1(t - t_ref) x_bar for the plane-induced homography of the 8-DOF parameters."""
    pixels: NDArray[np.float64] = _as_points(points)
    dt: NDArray[np.float64] = _as_times(t, pixels.shape[0]) - t_ref
    return _dehomogenize(_inverse_homography_rows(_lift(pixels, camera), dt, params), camera)


@dataclass(slots=True)
class PlaneTransfer:
    """Per-event viewing rays and camera centres expressed in the reference view.

    They do not depend on the depth hypothesis, so a plane sweep computes them once.
    """

    rays: NDArray[np.float64]
    centres: NDArray[np.float64]
    camera: CameraIntrinsics

    @classmethod
    def build(
        cls,
        points: ArrayLike,
        t: ArrayLike,
        trajectory: PoseTrajectory,
        reference: Pose,
        camera: CameraIntrinsics,
    ) -> "PlaneTransfer":
        pixels: NDArray[np.float64] = _as_points(points)
        times: NDArray[np.float64] = _as_times(t, pixels.shape[0])
        trajectory.require_coverage(times, context="Event")
        reference_rotation: NDArray[np.float64] = reference.rotation_matrix()
        if pixels.shape[0] == 0:
            return cls(rays=np.zeros((0, 3)), centres=np.zeros((0, 3)), camera=camera)
        rotations, translations = trajectory.interpolate_many(times)
        world_rays: NDArray[np.float64] = rotations.apply(_lift(pixels, camera))
        rays: NDArray[np.float64] = world_rays @ reference_rotation
        centres: NDArray[np.float64] = (translations - reference.translation) @ reference_rotation
        return cls(rays=rays, centres=centres, camera=camera)

    def warp(self, z: float) -> WarpResult:
        """Intersect each ray with the plane Z = z of the reference view and project it."""
        if not z > 0.0:
            raise ParameterError(f"Plane depth must be positive, got {z}.")
        ray_z: NDArray[np.float64] = self.rays[:, 2]
        usable: NDArray[np.bool_] = np.abs(ray_z) > MIN_DEPTH_DENOMINATOR
        scale: NDArray[np.float64] = (z - self.centres[:, 2]) / np.where(usable, ray_z, 1.0)
        valid: NDArray[np.bool_] = usable & (scale > 0.0)
        plane_points: NDArray[np.float64] = self.centres[:, :2] + scale[:, None] * self.rays[:, :2]
        return WarpResult(points=self.camera.denormalize(plane_points / z), valid=valid)


def warp_plane_depth(
    points: ArrayLike,
    t: ArrayLike,
    params: DepthParams,
    trajectory: PoseTrajectory,
    reference: Pose,
    camera: CameraIntrinsics,
) -> WarpResult:
    """Transfer event pixels into the reference view through the fronto-parallel plane at depth Z."""
    return PlaneTransfer.build(points, t, trajectory, reference, camera).warp(params.z)


class WarpModel(Protocol):
    """A warp bound to its fixed context (camera, trajectory) and driven by a parameter vector."""

    @property
    def problem(self) -> Problem: ...

    @property
    def dim(self) -> int: ...

    def warp(self, events: EventSlice, theta: NDArray[np.float64]) -> WarpResult: ...

    def scales(self, events: EventSlice) -> NDArray[np.float64]: ...

    def gradient_steps(self) -> NDArray[np.float64]: ...


def _window_duration(events: EventSlice) -> float:
    return max(events.duration, 1e-9)


@dataclass(slots=True)
class FlowWarp:
    """Constant image-plane velocity (2 parameters, px/s)."""

    problem: ClassVar[Problem] = Problem.FLOW
    dim: ClassVar[int] = FlowParams.DIM

    def warp(self, events: EventSlice, theta: NDArray[np.float64]) -> WarpResult:
        return warp_flow(events.points(), events.t, events.reference_time, FlowParams.from_vector(theta))

    def scales(self, events: EventSlice) -> NDArray[np.float64]:
        """Velocity that moves an event by one pixel over the window."""
        return np.full(self.dim, 1.0 / _window_duration(events))

    def gradient_steps(self) -> NDArray[np.float64]:
        return np.full(self.dim, DEFAULT_FLOW_GRADIENT_STEP)


@dataclass(slots=True)
class RotationWarp:
    """Constant angular velocity (3 parameters, rad/s)."""

    camera: CameraIntrinsics
    problem: ClassVar[Problem] = Problem.ROTATION
    dim: ClassVar[int] = RotationParams.DIM

    def warp(self, events: EventSlice, theta: NDArray[np.float64]) -> WarpResult:
        return warp_rotation(
            events.points(), events.t, events.reference_time, RotationParams.from_vector(theta), self.camera
        )

    def scales(self, events: EventSlice) -> NDArray[np.float64]:
        """Angular rate that moves a central pixel by one pixel over the window."""
        return np.full(self.dim, 1.0 / (self.camera.focal * _window_duration(events)))

    def gradient_steps(self) -> NDArray[np.float64]:
        return np.full(self.dim, DEFAULT_ROTATION_GRADIENT_STEP)


@dataclass(slots=True)
class HomographyWarp:
    """8-DOF planar scene motion: omega, v/d, phi, psi."""

    camera: CameraIntrinsics
    problem: ClassVar[Problem] = Problem.HOMOGRAPHY
    dim: ClassVar[int] = HomographyParams.DIM

    def warp(self, events: EventSlice, theta: NDArray[np.float64]) -> WarpResult:
        return warp_homography(
            events.points(), events.t, events.reference_time, HomographyParams.from_vector(theta), self.camera
        )

    def scales(self, events: EventSlice) -> NDArray[np.float64]:
        rate: float = 1.0 / (self.camera.focal * _window_duration(events))
        return np.array([rate, rate, rate, rate, rate, rate, ANGLE_SCALE, ANGLE_SCALE])

    def gradient_steps(self) -> NDArray[np.float64]:
        return np.full(self.dim, DEFAULT_HOMOGRAPHY_GRADIENT_STEP)


@dataclass(slots=True)
class PlaneDepthWarp:
    """Fronto-parallel plane at depth Z in the reference view (1 parameter, m).

    The per-event rays are cached for the most recent slice, so sweeping Z over one slice
    interpolates the trajectory only once.
    """

    camera: CameraIntrinsics
    trajectory: PoseTrajectory
    reference: Pose
    problem: ClassVar[Problem] = Problem.DEPTH
    dim: ClassVar[int] = DepthParams.DIM
    _cache: tuple[EventSlice, PlaneTransfer] | None = field(default=None, init=False, repr=False)

    def transfer(self, events: EventSlice) -> PlaneTransfer:
        cached: tuple[EventSlice, PlaneTransfer] | None = self._cache
        if cached is not None and cached[0] is events:
            return cached[1]
        plane_transfer: PlaneTransfer = PlaneTransfer.build(
            events.points(), events.t, self.trajectory, self.reference, self.camera
        )
        self._cache = (events, plane_transfer)
        logger.debug("Prepared plane transfer for {events}", events=events.describe())
        return plane_transfer

    def warp(self, events: EventSlice, theta: NDArray[np.float64]) -> WarpResult:
        return self.transfer(events).warp(DepthParams.from_vector(theta).z)

    def scales(self, events: EventSlice) -> NDArray[np.float64]:
        return np.ones(self.dim)

    def gradient_steps(self) -> NDArray[np.float64]:
        return np.full(self.dim, 1e-3)
