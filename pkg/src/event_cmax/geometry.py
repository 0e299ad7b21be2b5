"""Rotation-group and plane-normal helpers used by the warp models."""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.transform import Rotation

SMALL_ANGLE: float = 1e-8
POLE_TOLERANCE: float = 1e-12


def hat(vector: ArrayLike) -> NDArray[np.float64]:
    """Return the skew-symmetric matrix w^ with w^ x = w cross x."""
    wx, wy, wz = np.asarray(vector, dtype=np.float64).reshape(3)
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def vee(matrix: ArrayLike) -> NDArray[np.float64]:
    """Inverse of `hat` for a skew-symmetric 3x3 matrix."""
    m: NDArray[np.float64] = np.asarray(matrix, dtype=np.float64)
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def exp_so3(omega_t: ArrayLike) -> NDArray[np.float64]:
    """Rodrigues' formula for exp(w^); second-order Taylor expansion below `SMALL_ANGLE`."""
    rotvec: NDArray[np.float64] = np.asarray(omega_t, dtype=np.float64).reshape(3)
    theta: float = float(np.linalg.norm(rotvec))
    skew: NDArray[np.float64] = hat(rotvec)
    if theta < SMALL_ANGLE:
        return np.eye(3) + skew + 0.5 * (skew @ skew)
    axis_skew: NDArray[np.float64] = skew / theta
    return np.eye(3) + math.sin(theta) * axis_skew + (1.0 - math.cos(theta)) * (axis_skew @ axis_skew)


def log_so3(rotation: ArrayLike) -> NDArray[np.float64]:
    """Rotation vector of a rotation matrix (inverse of `exp_so3` for angles below pi)."""
    return Rotation.from_matrix(np.asarray(rotation, dtype=np.float64)).as_rotvec()


def rotate_by_rotvecs(rotvecs: NDArray[np.float64], vectors: NDArray[np.float64]) -> NDArray[np.float64]:
    """Apply exp(w_k^) to v_k row by row without forming matrices.

    Uses R v = v + a (w x v) + b (w x (w x v)) with a = sin(t)/t, b = (1 - cos(t))/t^2,
    falling back to a = 1, b = 1/2 for t below `SMALL_ANGLE`.
    """
    theta: NDArray[np.float64] = np.linalg.norm(rotvecs, axis=1)
    small: NDArray[np.bool_] = theta < SMALL_ANGLE
    safe: NDArray[np.float64] = np.where(small, 1.0, theta)
    a: NDArray[np.float64] = np.where(small, 1.0, np.sin(safe) / safe)
    b: NDArray[np.float64] = np.where(small, 0.5, (1.0 - np.cos(safe)) / (safe * safe))
    cross: NDArray[np.float64] = np.cross(rotvecs, vectors)
    double_cross: NDArray[np.float64] = np.cross(rotvecs, cross)
    return vectors + a[:, None] * cross + b[:, None] * double_cross


def normal_from_angles(phi: float, psi: float) -> NDArray[np.float64]:
    """Unit plane normal n = (sin phi cos psi, sin phi sin psi, cos phi); zero angles give +z."""
    sin_phi: float = math.sin(phi)
    normal: NDArray[np.float64] = np.array([sin_phi * math.cos(psi), sin_phi * math.sin(psi), math.cos(phi)])
    return normal / np.linalg.norm(normal)


def angles_from_normal(normal: ArrayLike) -> tuple[float, float]:
    """Return (phi, psi) of a plane normal; psi is defined as 0 at the poles n = +-z."""
    n: NDArray[np.float64] = np.asarray(normal, dtype=np.float64).reshape(3)
    n = n / np.linalg.norm(n)
    phi: float = math.acos(float(np.clip(n[2], -1.0, 1.0)))
    if math.hypot(float(n[0]), float(n[1])) < POLE_TOLERANCE:
        return phi, 0.0
    psi: float = math.atan2(float(n[1]), float(n[0]))
    return phi, psi


def angle_between(first: ArrayLike, second: ArrayLike) -> float:
    """Angle in radians between two vectors."""
    a: NDArray[np.float64] = np.asarray(first, dtype=np.float64).reshape(3)
    b: NDArray[np.float64] = np.asarray(second, dtype=np.float64).reshape(3)
    cosine: float = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.acos(min(1.0, max(-1.0, cosine)))


__all__: list[str] = [
    "angle_between",
    "angles_from_normal",
    "exp_so3",
    "hat",
    "log_so3",
    "normal_from_angles",
    "rotate_by_rotvecs",
    "vee",
]
