"""Public API for event-cmax, contrast maximization for event cameras."""

from .classes_references import (
    EvaluationBudgetError,
    EventFormatError,
    ParameterError,
    RasterFormatError,
    SceneGeometryError,
    TrajectoryRangeError,
    ValidationError,
)
from .config import RunConfig, load_run_config, run_config_from_mapping
from .iwe import IWE, ContrastObjective, ContrastValue, GridSpec, accumulate, contrast, objective
from .models import (
    CameraIntrinsics,
    DepthParams,
    Event,
    EventSlice,
    FlowParams,
    HomographyParams,
    Pose,
    PoseTrajectory,
    RotationParams,
)
from .optimize import (
    Heatmap,
    OptimResult,
    SearchGrid,
    conjugate_gradient_ascent,
    golden_section_max,
    gradient_ascent,
    grid_search,
)
from .pipelines import (
    estimate_flow_patch,
    estimate_homography,
    semidense_depth,
    track_homography,
    track_rotation,
)
from .reader import load_calibration, load_events, load_trajectory, read_events, slice_events
from .synth import SynthConfig, gen_flow_scene, gen_planar_scene, gen_rotation_scene
from .type_helpers import AccumulationMode, CGVariant, LineSearchKind, Problem, RefTimePolicy, SliceBy, SplatKind
from .warps import FlowWarp, HomographyWarp, PlaneDepthWarp, RotationWarp, WarpModel, WarpResult
from .writer import DatasetWriter

__all__: list[str] = [
    "AccumulationMode",
    "CGVariant",
    "CameraIntrinsics",
    "ContrastObjective",
    "ContrastValue",
    "DatasetWriter",
    "DepthParams",
    "EvaluationBudgetError",
    "Event",
    "EventFormatError",
    "EventSlice",
    "FlowParams",
    "FlowWarp",
    "GridSpec",
    "Heatmap",
    "HomographyParams",
    "HomographyWarp",
    "IWE",
    "LineSearchKind",
    "OptimResult",
    "ParameterError",
    "PlaneDepthWarp",
    "Pose",
    "PoseTrajectory",
    "Problem",
    "RasterFormatError",
    "RefTimePolicy",
    "RotationParams",
    "RotationWarp",
    "RunConfig",
    "SceneGeometryError",
    "SearchGrid",
    "SliceBy",
    "SplatKind",
    "SynthConfig",
    "TrajectoryRangeError",
    "ValidationError",
    "WarpModel",
    "WarpResult",
    "accumulate",
    "conjugate_gradient_ascent",
    "contrast",
    "estimate_flow_patch",
    "estimate_homography",
    "gen_flow_scene",
    "gen_planar_scene",
    "gen_rotation_scene",
    "golden_section_max",
    "gradient_ascent",
    "grid_search",
    "load_calibration",
    "load_events",
    "load_run_config",
    "load_trajectory",
    "objective",
    "read_events",
    "run_config_from_mapping",
    "semidense_depth",
    "slice_events",
    "track_homography",
    "track_rotation",
]
