"""Angle and angular-rate conversion helpers shared across the event-cmax domain."""

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

RAD_TO_DEG: float = 180.0 / math.pi
DEG_TO_RAD: float = math.pi / 180.0


def radians_to_degrees(value: float) -> float:
    """Convert radians into degrees."""
    return value * RAD_TO_DEG


def deg_per_s_to_rad_per_s(value: ArrayLike) -> NDArray[np.float64]:
    """Convert an angular rate (scalar or vector) from degrees per second into radians per second."""
    return np.asarray(value, dtype=np.float64) * DEG_TO_RAD


def rad_per_s_to_deg_per_s(value: ArrayLike) -> NDArray[np.float64]:
    """Convert an angular rate (scalar or vector) from radians per second into degrees per second."""
    return np.asarray(value, dtype=np.float64) * RAD_TO_DEG
