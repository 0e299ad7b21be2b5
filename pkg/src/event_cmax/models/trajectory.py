"""Timestamped camera poses with slerp/lerp interpolation.

Poses are camera-to-world: `rotation` maps camera-frame vectors into the world frame and
`translation` is the camera centre in world coordinates. Quaternions use scipy's scalar-last
(x, y, z, w) order, which is also the order of the dataset ground-truth files.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation, Slerp

from ..classes_references import TrajectoryRangeError
from .base import Validatable, frozen_array

QUATERNION_NORM_TOLERANCE: float = 1e-9
POSE_CONVENTION: str = "camera-to-world, quaternion (qx, qy, qz, qw)"
DEFAULT_DIFFERENCE_STEP: float = 1e-3


@dataclass(slots=True)
class Pose(Validatable):
    """Camera-to-world pose at time `t` (seconds)."""

    t: float
    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.rotation = frozen_array(self.rotation, shape=(4,))
        self.translation = frozen_array(self.translation, shape=(3,))
        self.t = float(self.t)
        self.assert_valid()

    @classmethod
    def identity(cls, t: float = 0.0) -> "Pose":
        return cls(t=t, rotation=np.array([0.0, 0.0, 0.0, 1.0]), translation=np.zeros(3))

    @classmethod
    def from_matrix(cls, t: float, rotation: ArrayLike, translation: ArrayLike) -> "Pose":
        quaternion: NDArray[np.float64] = Rotation.from_matrix(np.asarray(rotation, dtype=np.float64)).as_quat()
        return cls(t=t, rotation=quaternion, translation=np.asarray(translation, dtype=np.float64))

    def rotation_matrix(self) -> NDArray[np.float64]:
        return Rotation.from_quat(self.rotation).as_matrix()

    def relative_to(self, reference: "Pose") -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Return (R, t) of this camera expressed in the `reference` camera frame."""
        reference_rotation: NDArray[np.float64] = reference.rotation_matrix()
        rotation: NDArray[np.float64] = reference_rotation.T @ self.rotation_matrix()
        translation: NDArray[np.float64] = reference_rotation.T @ (self.translation - reference.translation)
        return rotation, translation

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        norm: float = float(np.linalg.norm(self.rotation))
        if abs(norm - 1.0) > QUATERNION_NORM_TOLERANCE:
            errors.append(f"{prefix}Quaternion norm must be 1 within {QUATERNION_NORM_TOLERANCE}, got {norm:.12f}.")
        if not (np.all(np.isfinite(self.translation)) and np.isfinite(self.t)):
            errors.append(f"{prefix}Pose time and translation must be finite.")
        return errors

    def describe(self) -> str:
        return f"Pose(t={self.t:.6f}, q={np.round(self.rotation, 6).tolist()}, p={np.round(self.translation, 6).tolist()})"

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()


def _empty_times() -> NDArray[np.float64]:
    return np.zeros(0)


@dataclass(slots=True)
class PoseTrajectory(Validatable):
    """Ordered camera-to-world poses; at least two with strictly increasing timestamps."""

    times: NDArray[np.float64] = field(default_factory=_empty_times)
    quaternions: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 4)))
    translations: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 3)))
    convention: str = POSE_CONVENTION
    _slerp: Slerp | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.times = frozen_array(np.ravel(self.times))
        quaternions: NDArray[np.float64] = np.asarray(self.quaternions, dtype=np.float64).reshape(-1, 4)
        norms: NDArray[np.float64] = np.linalg.norm(quaternions, axis=1, keepdims=True)
        self.quaternions = frozen_array(quaternions / np.where(norms > 0.0, norms, 1.0))
        self.translations = frozen_array(np.asarray(self.translations, dtype=np.float64).reshape(-1, 3))
        self.assert_valid()
        self._slerp = Slerp(self.times, Rotation.from_quat(self.quaternions))

    @classmethod
    def from_poses(cls, poses: Sequence[Pose]) -> "PoseTrajectory":
        return cls(
            times=np.array([pose.t for pose in poses], dtype=np.float64),
            quaternions=np.array([pose.rotation for pose in poses], dtype=np.float64).reshape(-1, 4),
            translations=np.array([pose.translation for pose in poses], dtype=np.float64).reshape(-1, 3),
        )

    @classmethod
    def from_rotations(
        cls, times: ArrayLike, rotations: Rotation, translations: ArrayLike | None = None
    ) -> "PoseTrajectory":
        stamps: NDArray[np.float64] = np.asarray(times, dtype=np.float64)
        positions: NDArray[np.float64] = (
            np.zeros((stamps.size, 3)) if translations is None else np.asarray(translations, dtype=np.float64)
        )
        return cls(times=stamps, quaternions=rotations.as_quat(), translations=positions)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def poses(self) -> list[Pose]:
        return [self.pose_at_index(index) for index in range(len(self))]

    def pose_at_index(self, index: int) -> Pose:
        return Pose(t=float(self.times[index]), rotation=self.quaternions[index], translation=self.translations[index])

    def covers(self, times: ArrayLike) -> bool:
        stamps: NDArray[np.float64] = np.asarray(times, dtype=np.float64)
        if stamps.size == 0:
            return True
        return bool(float(stamps.min()) >= self.t_start and float(stamps.max()) <= self.t_end)

    def require_coverage(self, times: ArrayLike, context: str = "query") -> None:
        stamps: NDArray[np.float64] = np.asarray(times, dtype=np.float64)
        if not self.covers(stamps):
            raise TrajectoryRangeError(
                f"{context} times [{float(stamps.min()):.6f}, {float(stamps.max()):.6f}] fall outside the "
                f"trajectory range [{self.t_start:.6f}, {self.t_end:.6f}]."
            )

    def interpolate(self, t: float) -> Pose:
        """Pose at time `t`: slerp on rotation, lerp on translation, exact at knots."""
        self.require_coverage(np.array([t]), context="Pose")
        index: int = int(np.searchsorted(self.times, t))
        if index < len(self) and float(self.times[index]) == t:
            return self.pose_at_index(index)
        rotations, translations = self.interpolate_many(np.array([t]))
        return Pose(t=t, rotation=rotations[0].as_quat(), translation=translations[0])

    def interpolate_many(self, times: ArrayLike) -> tuple[Rotation, NDArray[np.float64]]:
        """Vectorized interpolation returning (rotations, translations) for every query time."""
        stamps: NDArray[np.float64] = np.atleast_1d(np.asarray(times, dtype=np.float64))
        self.require_coverage(stamps)
        slerp: Slerp = self._slerp if self._slerp is not None else Slerp(self.times, Rotation.from_quat(self.quaternions))
        rotations: Rotation = slerp(stamps)
        translations: NDArray[np.float64] = np.column_stack(
            [np.interp(stamps, self.times, self.translations[:, axis]) for axis in range(3)]
        )
        return rotations, translations

    def angular_velocity(self, t: ArrayLike, step: float = DEFAULT_DIFFERENCE_STEP) -> NDArray[np.float64]:
        """Body-frame angular velocity (rad/s) by central differences of interpolated rotations.

        Returns an (N, 3) array: log(R(t - h)^T R(t + h)) / 2h, with the stencil clipped to the
        trajectory range at the ends.
        """
        stamps: NDArray[np.float64] = np.atleast_1d(np.asarray(t, dtype=np.float64))
        self.require_coverage(stamps, context="Angular velocity")
        before: NDArray[np.float64] = np.clip(stamps - step, self.t_start, self.t_end)
        after: NDArray[np.float64] = np.clip(stamps + step, self.t_start, self.t_end)
        rotations_before, _ = self.interpolate_many(before)
        rotations_after, _ = self.interpolate_many(after)
        delta: NDArray[np.float64] = (rotations_before.inv() * rotations_after).as_rotvec()
        return delta / (after - before)[:, None]

    def shifted(self, offset: float) -> "PoseTrajectory":
        """Return the trajectory with `offset` subtracted from every timestamp."""
        return PoseTrajectory(
            times=self.times - offset,
            quaternions=self.quaternions,
            translations=self.translations,
            convention=self.convention,
        )

    def metadata(self) -> dict[str, Any]:
        return {"convention": self.convention, "poses": len(self), "t_start": self.t_start, "t_end": self.t_end}

    def describe(self) -> str:
        if len(self) == 0:
            return "PoseTrajectory(poses=0)"
        return f"PoseTrajectory(poses={len(self)}, t=[{self.t_start:.6f}, {self.t_end:.6f}])"

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        count: int = self.times.size
        if count < 2:
            errors.append(f"{prefix}A trajectory needs at least 2 poses for interpolation, got {count}.")
        if self.quaternions.shape[0] != count or self.translations.shape[0] != count:
            errors.append(f"{prefix}Trajectory columns must have equal length.")
            return errors
        if count >= 2 and not np.all(np.diff(self.times) > 0.0):
            errors.append(f"{prefix}Trajectory timestamps must be strictly increasing.")
        if not np.all(np.isfinite(self.times)) or not np.all(np.isfinite(self.translations)):
            errors.append(f"{prefix}Trajectory times and translations must be finite.")
        if count and not np.allclose(np.linalg.norm(self.quaternions, axis=1), 1.0, atol=QUATERNION_NORM_TOLERANCE):
            errors.append(f"{prefix}Quaternions must be finite and non-zero.")
        if errors:
            logger.debug("PoseTrajectory validation errors: {errors}", errors=errors)
        return errors


def interpolate_pose(trajectory: PoseTrajectory, t: float) -> Pose:
    """Pose of the camera at time `t`; raises `TrajectoryRangeError` outside the trajectory."""
    return trajectory.interpolate(t)
