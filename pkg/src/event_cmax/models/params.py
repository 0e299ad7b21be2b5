"""Warp parameter vectors for the four motion/scene models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Mapping, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..geometry import angles_from_normal, normal_from_angles
from .base import Validatable, frozen_array, normalize_sequence


def _vector(value: ArrayLike, size: int) -> NDArray[np.float64]:
    return frozen_array(np.asarray(value, dtype=np.float64).reshape(size))


def _zeros2() -> NDArray[np.float64]:
    return np.zeros(2)


def _zeros3() -> NDArray[np.float64]:
    return np.zeros(3)


def _finite(values: ArrayLike) -> bool:
    return bool(np.all(np.isfinite(np.asarray(values, dtype=np.float64))))


@dataclass(slots=True)
class FlowParams(Validatable):
    """Image-plane velocity v (px/s)."""

    DIM: ClassVar[int] = 2
    v: NDArray[np.float64] = field(default_factory=_zeros2)

    def __post_init__(self) -> None:
        self.v = _vector(self.v, 2)

    @classmethod
    def from_vector(cls, theta: ArrayLike) -> "FlowParams":
        return cls(v=np.asarray(theta, dtype=np.float64))

    def as_vector(self) -> NDArray[np.float64]:
        return np.array(self.v)

    def to_dict(self) -> dict[str, Any]:
        return {"v": self.v.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FlowParams":
        return cls(v=np.array(normalize_sequence(data.get("v")) or [0.0, 0.0], dtype=np.float64))

    def validate(self, prefix: str = "") -> list[str]:
        return [] if _finite(self.v) else [f"{prefix}Flow velocity must be finite."]


@dataclass(slots=True)
class RotationParams(Validatable):
    """Angular velocity omega (rad/s) of the rotation warp in the camera frame."""

    DIM: ClassVar[int] = 3
    omega: NDArray[np.float64] = field(default_factory=_zeros3)

    def __post_init__(self) -> None:
        self.omega = _vector(self.omega, 3)

    @classmethod
    def from_vector(cls, theta: ArrayLike) -> "RotationParams":
        return cls(omega=np.asarray(theta, dtype=np.float64))

    def as_vector(self) -> NDArray[np.float64]:
        return np.array(self.omega)

    def to_dict(self) -> dict[str, Any]:
        return {"omega": self.omega.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RotationParams":
        return cls(omega=np.array(normalize_sequence(data.get("omega")) or [0.0, 0.0, 0.0], dtype=np.float64))

    def validate(self, prefix: str = "") -> list[str]:
        return [] if _finite(self.omega) else [f"{prefix}Angular velocity must be finite."]

    def validate_for_duration(self, duration: float, prefix: str = "") -> list[str]:
        """Check that the rotation accumulated over `duration` stays below pi."""
        errors: list[str] = self.validate(prefix)
        angle: float = float(np.linalg.norm(self.omega)) * abs(duration)
        if angle >= math.pi:
            errors.append(f"{prefix}Rotation angle {angle:.4f} rad over {duration:.6f} s must stay below pi.")
        return errors


@dataclass(slots=True)
class DepthParams(Validatable):
    """Depth Z (m) of the fronto-parallel plane in the reference view."""

    DIM: ClassVar[int] = 1
    z: float = 1.0

    @classmethod
    def from_vector(cls, theta: ArrayLike) -> "DepthParams":
        return cls(z=float(np.asarray(theta, dtype=np.float64).reshape(1)[0]))

    def as_vector(self) -> NDArray[np.float64]:
        return np.array([self.z])

    def to_dict(self) -> dict[str, Any]:
        return {"z": self.z}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DepthParams":
        return cls(z=float(data.get("z", 1.0)))

    def validate(self, prefix: str = "") -> list[str]:
        if not (math.isfinite(self.z) and self.z > 0.0):
            return [f"{prefix}Depth must be finite and positive, got {self.z}."]
        return []


@dataclass(slots=True)
class HomographyParams(Validatable):
    """8-DOF planar motion: omega (rad/s), v/d (1/s) and the plane-normal angles (phi, psi).

    The plane is n^T X + d = 0 in the reference camera frame with n = n(phi, psi). Only the
    ratio v/d is observable.
    """

    DIM: ClassVar[int] = 8
    omega: NDArray[np.float64] = field(default_factory=_zeros3)
    v_over_d: NDArray[np.float64] = field(default_factory=_zeros3)
    phi: float = 0.0
    psi: float = 0.0

    def __post_init__(self) -> None:
        self.omega = _vector(self.omega, 3)
        self.v_over_d = _vector(self.v_over_d, 3)
        self.phi = float(self.phi)
        self.psi = float(self.psi)

    @classmethod
    def from_vector(cls, theta: ArrayLike) -> "HomographyParams":
        values: NDArray[np.float64] = np.asarray(theta, dtype=np.float64).reshape(8)
        return cls(omega=values[0:3], v_over_d=values[3:6], phi=float(values[6]), psi=float(values[7]))

    @classmethod
    def from_normal(cls, omega: ArrayLike, v_over_d: ArrayLike, normal: ArrayLike) -> "HomographyParams":
        phi, psi = angles_from_normal(normal)
        return cls(
            omega=np.asarray(omega, dtype=np.float64),
            v_over_d=np.asarray(v_over_d, dtype=np.float64),
            phi=phi,
            psi=psi,
        )

    def as_vector(self) -> NDArray[np.float64]:
        return np.concatenate((self.omega, self.v_over_d, [self.phi, self.psi]))

    @property
    def normal(self) -> NDArray[np.float64]:
        return normal_from_angles(self.phi, self.psi)

    def canonical(self) -> "HomographyParams":
        """Equivalent parameters with n_z <= 0; flipping n together with v/d leaves H unchanged."""
        normal: NDArray[np.float64] = self.normal
        if normal[2] <= 0.0:
            phi, psi = angles_from_normal(normal)
            return HomographyParams(omega=self.omega, v_over_d=self.v_over_d, phi=phi, psi=psi)
        return HomographyParams.from_normal(self.omega, -self.v_over_d, -normal)

    def to_dict(self) -> dict[str, Any]:
        return {
            "omega": self.omega.tolist(),
            "v_over_d": self.v_over_d.tolist(),
            "phi": self.phi,
            "psi": self.psi,
            "normal": self.normal.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HomographyParams":
        omega: list[Any] = normalize_sequence(data.get("omega")) or [0.0, 0.0, 0.0]
        v_over_d: list[Any] = normalize_sequence(data.get("v_over_d")) or [0.0, 0.0, 0.0]
        if "normal" in data and "phi" not in data:
            return cls.from_normal(omega, v_over_d, normalize_sequence(data.get("normal")))
        return cls(
            omega=np.array(omega, dtype=np.float64),
            v_over_d=np.array(v_over_d, dtype=np.float64),
            phi=float(data.get("phi", 0.0)),
            psi=float(data.get("psi", 0.0)),
        )

    def validate(self, prefix: str = "") -> list[str]:
        if not _finite(self.as_vector()):
            return [f"{prefix}Homography parameters must be finite."]
        return []


WarpParams: TypeAlias = FlowParams | RotationParams | DepthParams | HomographyParams
