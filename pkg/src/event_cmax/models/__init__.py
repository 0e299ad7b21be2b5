"""
Domain models for event-based contrast maximization.

These data classes hold the immutable inputs of every estimator: event slices, camera
intrinsics, camera pose trajectories and the parameter vectors of the four warp models.
"""

from __future__ import annotations

from .base import Validatable
from .camera import CameraIntrinsics, calibrated_to_pixel, pixel_to_calibrated
from .events import Event, EventSlice
from .params import DepthParams, FlowParams, HomographyParams, RotationParams, WarpParams
from .trajectory import Pose, PoseTrajectory, interpolate_pose

__all__: list[str] = [
    "CameraIntrinsics",
    "DepthParams",
    "Event",
    "EventSlice",
    "FlowParams",
    "HomographyParams",
    "Pose",
    "PoseTrajectory",
    "RotationParams",
    "Validatable",
    "WarpParams",
    "calibrated_to_pixel",
    "interpolate_pose",
    "pixel_to_calibrated",
]
