"""End-to-end estimators: patch flow, rotation tracking, plane-sweep depth and planar homography."""

from .depth import (
    DepthCountRun,
    DepthResult,
    SemiDenseDepthMap,
    adaptive_threshold,
    depth_for_patch,
    depth_samples,
    depth_vs_event_count,
    nan_median_filter,
    reference_pose,
    semidense_depth,
)
from .flow import (
    FlowEstimate,
    PolarityComparison,
    compare_polarity_modes,
    default_flow_search,
    estimate_flow_patch,
    half_maximum_basin,
)
from .homography import (
    HomographyError,
    HomographyEstimate,
    HomographySeries,
    estimate_homography,
    homography_error,
    track_homography,
)
from .metrics import AngularErrorReport, ground_truth_omega, rms_angular_error
from .rotation import AngularVelocitySample, AngularVelocitySeries, TrackingConfig, track_rotation

__all__: list[str] = [
    "AngularErrorReport",
    "AngularVelocitySample",
    "AngularVelocitySeries",
    "DepthCountRun",
    "DepthResult",
    "FlowEstimate",
    "HomographyError",
    "HomographyEstimate",
    "HomographySeries",
    "PolarityComparison",
    "SemiDenseDepthMap",
    "TrackingConfig",
    "adaptive_threshold",
    "compare_polarity_modes",
    "default_flow_search",
    "depth_for_patch",
    "depth_samples",
    "depth_vs_event_count",
    "estimate_flow_patch",
    "estimate_homography",
    "ground_truth_omega",
    "half_maximum_basin",
    "homography_error",
    "nan_median_filter",
    "reference_pose",
    "rms_angular_error",
    "semidense_depth",
    "track_homography",
    "track_rotation",
]
