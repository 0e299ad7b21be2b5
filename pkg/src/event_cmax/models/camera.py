"""Pinhole camera intrinsics with radial-tangential distortion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike, NDArray

from .base import Validatable, normalize_sequence

UNDISTORT_MAX_ITERATIONS: int = 10
UNDISTORT_TOLERANCE_PX: float = 1e-8
DISTORTION_TERMS: int = 5


def _zero_distortion() -> tuple[float, ...]:
    return (0.0, 0.0, 0.0, 0.0, 0.0)


def _as_points(points: ArrayLike) -> NDArray[np.float64]:
    array: NDArray[np.float64] = np.asarray(points, dtype=np.float64)
    return np.atleast_2d(array).reshape(-1, 2)


@dataclass(slots=True)
class CameraIntrinsics(Validatable):
    """Pinhole intrinsics (pixels) with OpenCV-ordered distortion coefficients (k1, k2, p1, p2, k3)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    dist: tuple[float, ...] = field(default_factory=_zero_distortion)

    def __post_init__(self) -> None:
        values: list[float] = [float(value) for value in self.dist]
        if len(values) < DISTORTION_TERMS:
            values.extend([0.0] * (DISTORTION_TERMS - len(values)))
        self.dist = tuple(values)
        self.assert_valid()

    @classmethod
    def ideal(cls, focal: float, width: int, height: int) -> "CameraIntrinsics":
        """Distortion-free camera with square pixels and the principal point at the sensor centre."""
        return cls(fx=focal, fy=focal, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0, width=width, height=height)

    @property
    def has_distortion(self) -> bool:
        return any(value != 0.0 for value in self.dist)

    @property
    def focal(self) -> float:
        """Mean focal length, used to convert calibrated displacements into pixels."""
        return 0.5 * (self.fx + self.fy)

    def matrix(self) -> NDArray[np.float64]:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def undistorted(self) -> "CameraIntrinsics":
        """Return the same pinhole model without distortion (the model of undistorted event coordinates)."""
        return CameraIntrinsics(fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy, width=self.width, height=self.height)

    def normalize(self, points: ArrayLike) -> NDArray[np.float64]:
        """Pinhole-only pixel to calibrated map (no distortion handling)."""
        pixels: NDArray[np.float64] = _as_points(points)
        return np.column_stack(((pixels[:, 0] - self.cx) / self.fx, (pixels[:, 1] - self.cy) / self.fy))

    def denormalize(self, points: ArrayLike) -> NDArray[np.float64]:
        """Pinhole-only calibrated to pixel map (no distortion handling)."""
        calibrated: NDArray[np.float64] = _as_points(points)
        return np.column_stack((calibrated[:, 0] * self.fx + self.cx, calibrated[:, 1] * self.fy + self.cy))

    def distort(self, points: ArrayLike) -> NDArray[np.float64]:
        """Apply the radial-tangential model to undistorted calibrated points."""
        calibrated: NDArray[np.float64] = _as_points(points)
        k1, k2, p1, p2, k3 = self.dist
        x: NDArray[np.float64] = calibrated[:, 0]
        y: NDArray[np.float64] = calibrated[:, 1]
        r2: NDArray[np.float64] = x * x + y * y
        radial: NDArray[np.float64] = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
        x_d: NDArray[np.float64] = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
        y_d: NDArray[np.float64] = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
        return np.column_stack((x_d, y_d))

    def _distortion_jacobian(self, x: NDArray[np.float64], y: NDArray[np.float64]) -> NDArray[np.float64]:
        """Per-point 2x2 Jacobian of `distort`, shaped (n, 2, 2)."""
        k1, k2, p1, p2, k3 = self.dist
        r2: NDArray[np.float64] = x * x + y * y
        radial: NDArray[np.float64] = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
        slope: NDArray[np.float64] = k1 + r2 * (2.0 * k2 + 3.0 * k3 * r2)
        cross: NDArray[np.float64] = 2.0 * x * y * slope + 2.0 * p1 * x + 2.0 * p2 * y
        jacobian: NDArray[np.float64] = np.empty((x.size, 2, 2))
        jacobian[:, 0, 0] = radial + 2.0 * x * x * slope + 2.0 * p1 * y + 6.0 * p2 * x
        jacobian[:, 0, 1] = cross
        jacobian[:, 1, 0] = cross
        jacobian[:, 1, 1] = radial + 2.0 * y * y * slope + 6.0 * p1 * y + 2.0 * p2 * x
        return jacobian

    def undistort(self, points: ArrayLike) -> NDArray[np.float64]:
        """Invert `distort` by Newton iteration on distorted calibrated points.

        Points beyond the fold of a strong barrel model have no preimage; they keep their last
        iterate and are reported with a warning.
        """
        distorted: NDArray[np.float64] = _as_points(points)
        if not self.has_distortion or distorted.size == 0:
            return distorted.copy()
        tolerance: float = UNDISTORT_TOLERANCE_PX / max(self.fx, self.fy)
        current: NDArray[np.float64] = distorted.copy()
        residual: NDArray[np.float64] = self.distort(current) - distorted
        iterations: int = 0
        for iterations in range(1, UNDISTORT_MAX_ITERATIONS + 1):
            jacobian: NDArray[np.float64] = self._distortion_jacobian(current[:, 0], current[:, 1])
            det: NDArray[np.float64] = jacobian[:, 0, 0] * jacobian[:, 1, 1] - jacobian[:, 0, 1] * jacobian[:, 1, 0]
            solvable: NDArray[np.bool_] = np.abs(det) > 1e-12
            safe_det: NDArray[np.float64] = np.where(solvable, det, 1.0)
            step_x: NDArray[np.float64] = jacobian[:, 1, 1] * residual[:, 0] - jacobian[:, 0, 1] * residual[:, 1]
            step_y: NDArray[np.float64] = jacobian[:, 0, 0] * residual[:, 1] - jacobian[:, 1, 0] * residual[:, 0]
            newton: NDArray[np.float64] = np.column_stack((step_x, step_y)) / safe_det[:, None]
            step: NDArray[np.float64] = np.where(solvable[:, None], newton, 0.0)
            candidate: NDArray[np.float64] = current - step
            candidate_residual: NDArray[np.float64] = self.distort(candidate) - distorted
            # a step that does not shrink the residual is halved once
            worse: NDArray[np.bool_] = np.linalg.norm(candidate_residual, axis=1) > np.linalg.norm(residual, axis=1)
            if worse.any():
                candidate[worse] = current[worse] - 0.5 * step[worse]
                candidate_residual[worse] = self.distort(candidate[worse]) - distorted[worse]
            current, residual = candidate, candidate_residual
            if float(np.max(np.abs(residual))) < tolerance:
                break
        unresolved: int = int(np.count_nonzero(np.max(np.abs(residual), axis=1) >= tolerance))
        if unresolved:
            logger.warning(
                "{count} of {total} points did not undistort to {tol} px in {iterations} iterations",
                count=unresolved,
                total=len(current),
                tol=UNDISTORT_TOLERANCE_PX,
                iterations=iterations,
            )
        logger.debug("Undistorted {count} points in {iterations} iterations", count=len(current), iterations=iterations)
        return current

    def pixel_to_calibrated(self, points: ArrayLike) -> NDArray[np.float64]:
        return self.undistort(self.normalize(points))

    def calibrated_to_pixel(self, points: ArrayLike) -> NDArray[np.float64]:
        return self.denormalize(self.distort(points))

    def undistort_pixels(self, points: ArrayLike) -> NDArray[np.float64]:
        """Map raw sensor pixels to the pixels of the ideal (undistorted) pinhole camera."""
        return self.denormalize(self.pixel_to_calibrated(points))

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """True for pixel positions inside the sensor under the pixel-centre convention."""
        pixels: NDArray[np.float64] = _as_points(points)
        return (
            (pixels[:, 0] >= -0.5)
            & (pixels[:, 0] < self.width - 0.5)
            & (pixels[:, 1] >= -0.5)
            & (pixels[:, 1] < self.height - 0.5)
        )

    def describe(self) -> str:
        return (
            f"CameraIntrinsics(fx={self.fx:.3f}, fy={self.fy:.3f}, cx={self.cx:.3f}, cy={self.cy:.3f}, "
            f"size={self.width}x{self.height}, distorted={self.has_distortion})"
        )

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return self.describe()

    def to_dict(self) -> dict[str, Any]:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "width": self.width,
            "height": self.height,
            "dist": list(self.dist),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CameraIntrinsics":
        width: int = int(data["width"])
        height: int = int(data["height"])
        dist_raw: list[Any] = normalize_sequence(data.get("dist"))
        return cls(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data.get("cx", (width - 1) / 2.0)),
            cy=float(data.get("cy", (height - 1) / 2.0)),
            width=width,
            height=height,
            dist=tuple(float(value) for value in dist_raw) if dist_raw else _zero_distortion(),
        )

    def validate(self, prefix: str = "") -> list[str]:
        errors: list[str] = []
        if not (math.isfinite(self.fx) and self.fx > 0 and math.isfinite(self.fy) and self.fy > 0):
            errors.append(f"{prefix}Focal lengths must be positive (fx={self.fx}, fy={self.fy}).")
        if self.width <= 0 or self.height <= 0:
            errors.append(f"{prefix}Sensor size must be positive ({self.width}x{self.height}).")
        if not 0.0 <= self.cx < self.width:
            errors.append(f"{prefix}Principal point cx={self.cx} must lie in [0, {self.width}).")
        if not 0.0 <= self.cy < self.height:
            errors.append(f"{prefix}Principal point cy={self.cy} must lie in [0, {self.height}).")
        if len(self.dist) != DISTORTION_TERMS:
            errors.append(f"{prefix}Provide exactly {DISTORTION_TERMS} distortion coefficients.")
        elif not all(math.isfinite(value) for value in self.dist):
            errors.append(f"{prefix}Distortion coefficients must be finite.")
        return errors


def pixel_to_calibrated(points: ArrayLike, camera: CameraIntrinsics) -> NDArray[np.float64]:
    """Map pixel positions to undistorted calibrated coordinates, returned as an (N, 2) array."""
    return camera.pixel_to_calibrated(points)


def calibrated_to_pixel(points: ArrayLike, camera: CameraIntrinsics) -> NDArray[np.float64]:
    """Map undistorted calibrated coordinates to (distorted) pixel positions, returned as an (N, 2) array."""
    return camera.calibrated_to_pixel(points)
