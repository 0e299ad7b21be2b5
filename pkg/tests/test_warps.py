"""Warp functions, warp models and the rotation helpers they rely on."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from event_cmax import (
    CameraIntrinsics,
    DepthParams,
    EventSlice,
    FlowParams,
    FlowWarp,
    HomographyParams,
    HomographyWarp,
    ParameterError,
    Pose,
    PoseTrajectory,
    RotationParams,
    RotationWarp,
)
from event_cmax.geometry import angle_between, angles_from_normal, exp_so3, hat, log_so3, normal_from_angles, vee
from event_cmax.synth import translation_trajectory
from event_cmax.warps import (
    PlaneTransfer,
    WarpResult,
    homography_matrix,
    warp_flow,
    warp_homography,
    warp_plane_depth,
    warp_rotation,
)

from .sample_data import SMALL_CAMERA, tiny_slice

UNIT_CAMERA: CameraIntrinsics = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=4, height=4)


def _random_pixels(count: int, seed: int = 0) -> NDArray[np.float64]:
    rng: np.random.Generator = np.random.default_rng(seed)
    columns: NDArray[np.float64] = rng.uniform(0.0, SMALL_CAMERA.width - 1, count)
    rows: NDArray[np.float64] = rng.uniform(0.0, SMALL_CAMERA.height - 1, count)
    return np.column_stack((columns, rows))


def test_hat_and_vee_are_inverse() -> None:
    vector: NDArray[np.float64] = np.array([0.3, -1.2, 2.0])
    assert vee(hat(vector)) == pytest.approx(vector)
    assert hat(vector) @ np.array([1.0, 2.0, 3.0]) == pytest.approx(np.cross(vector, [1.0, 2.0, 3.0]))


def test_exponential_map_matches_scipy_and_log() -> None:
    rotvec: NDArray[np.float64] = np.array([0.2, -0.4, 1.1])
    assert exp_so3(rotvec) == pytest.approx(Rotation.from_rotvec(rotvec).as_matrix())
    assert log_so3(exp_so3(rotvec)) == pytest.approx(rotvec)
    assert exp_so3(np.zeros(3)) == pytest.approx(np.eye(3))


def test_normal_angles_round_trip() -> None:
    normal: NDArray[np.float64] = np.array([0.3, -0.2, -0.9])
    normal /= np.linalg.norm(normal)
    phi, psi = angles_from_normal(normal)
    assert normal_from_angles(phi, psi) == pytest.approx(normal)
    assert angles_from_normal([0.0, 0.0, -1.0]) == pytest.approx((math.pi, 0.0))
    assert math.degrees(angle_between([1.0, 0.0, 0.0], [0.0, 2.0, 0.0])) == pytest.approx(90.0)


def test_flow_warp_moves_events_back_along_the_velocity() -> None:
    result: WarpResult = warp_flow([[10.0, 5.0], [10.0, 5.0]], [0.1, 0.3], 0.1, FlowParams(v=[20.0, -10.0]))
    assert result.points == pytest.approx(np.array([[10.0, 5.0], [6.0, 7.0]]))
    assert result.valid.all()


def test_rotation_warp_quarter_turn_about_the_optical_axis() -> None:
    result: WarpResult = warp_rotation([[1.0, 0.0]], [0.5], 0.0, RotationParams(omega=[0.0, 0.0, math.pi]), UNIT_CAMERA)
    assert result.points[0] == pytest.approx([0.0, -1.0], abs=1e-12)


def test_rotation_about_the_optical_axis_keeps_the_radius() -> None:
    pixels: NDArray[np.float64] = _random_pixels(50)
    times: NDArray[np.float64] = np.linspace(0.0, 0.05, 50)
    result: WarpResult = warp_rotation(pixels, times, 0.0, RotationParams(omega=[0.0, 0.0, 3.0]), SMALL_CAMERA)
    before: NDArray[np.float64] = np.linalg.norm(SMALL_CAMERA.normalize(pixels), axis=1)
    after: NDArray[np.float64] = np.linalg.norm(SMALL_CAMERA.normalize(result.points), axis=1)
    assert after == pytest.approx(before)


def test_rotation_warps_compose_through_an_intermediate_time() -> None:
    params: RotationParams = RotationParams(omega=[0.7, -1.5, 2.2])
    pixels: NDArray[np.float64] = _random_pixels(20, seed=4)
    direct: WarpResult = warp_rotation(pixels, 0.08, 0.0, params, SMALL_CAMERA)
    halfway: WarpResult = warp_rotation(pixels, 0.08, 0.03, params, SMALL_CAMERA)
    chained: WarpResult = warp_rotation(halfway.points, 0.03, 0.0, params, SMALL_CAMERA)
    assert chained.points == pytest.approx(direct.points, abs=1e-9)


@pytest.mark.parametrize(
    "params",
    [
        FlowParams(v=[35.0, -12.0]),
        RotationParams(omega=[1.0, 2.0, -3.0]),
        HomographyParams.from_normal([0.5, 0.1, 0.0], [0.4, -0.2, 0.3], [0.1, 0.2, -1.0]),
    ],
)
def test_every_warp_is_the_identity_at_the_reference_time(params: FlowParams | RotationParams | HomographyParams) -> None:
    pixels: NDArray[np.float64] = _random_pixels(30, seed=1)
    if isinstance(params, FlowParams):
        result: WarpResult = warp_flow(pixels, 0.25, 0.25, params)
    elif isinstance(params, RotationParams):
        result = warp_rotation(pixels, 0.25, 0.25, params, SMALL_CAMERA)
    else:
        result = warp_homography(pixels, 0.25, 0.25, params, SMALL_CAMERA)
    assert result.points == pytest.approx(pixels, abs=1e-10)


def test_homography_without_translation_is_the_rotation_warp() -> None:
    omega: list[float] = [0.4, -0.9, 1.7]
    pixels: NDArray[np.float64] = _random_pixels(40, seed=2)
    times: NDArray[np.float64] = np.linspace(0.0, 0.1, 40)
    planar: WarpResult = warp_homography(
        pixels, times, 0.02, HomographyParams.from_normal(omega, [0.0, 0.0, 0.0], [0.3, 0.0, -1.0]), SMALL_CAMERA
    )
    rotational: WarpResult = warp_rotation(pixels, times, 0.02, RotationParams(omega=omega), SMALL_CAMERA)
    assert planar.points == pytest.approx(rotational.points, abs=1e-9)


def test_homography_translation_towards_the_camera_facing_plane() -> None:
    params: HomographyParams = HomographyParams.from_normal([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0])
    result: WarpResult = warp_homography([[0.2, -0.1]], [0.1], 0.0, params, UNIT_CAMERA)
    assert result.points[0] == pytest.approx([0.3, -0.1])


def test_homography_matrix_inverse_matches_the_row_wise_warp() -> None:
    params: HomographyParams = HomographyParams.from_normal([0.3, -0.2, 0.5], [0.8, 0.1, -0.4], [0.2, -0.1, -1.0])
    matrix: NDArray[np.float64] = homography_matrix(params, 0.07)
    pixel: NDArray[np.float64] = np.array([[0.4, -0.3]])
    expected: NDArray[np.float64] = np.linalg.solve(matrix, np.array([0.4, -0.3, 1.0]))
    result: WarpResult = warp_homography(pixel, 0.07, 0.0, params, UNIT_CAMERA)
    assert result.points[0] == pytest.approx(expected[:2] / expected[2])


def test_singular_homography_raises() -> None:
    params: HomographyParams = HomographyParams.from_normal([0.0, 0.0, 0.0], [0.0, 0.0, 10.0], [0.0, 0.0, -1.0])
    with pytest.raises(ParameterError, match="singular"):
        warp_homography([[0.0, 0.0]], [0.1], 0.0, params, UNIT_CAMERA)


def test_plane_depth_transfer_shifts_by_the_disparity() -> None:
    trajectory: PoseTrajectory = translation_trajectory([0.2, 0.0, 0.0], 0.2)
    result: WarpResult = warp_plane_depth(
        [[0.2, 0.1]], [0.1], DepthParams(z=1.0), trajectory, Pose.identity(0.0), UNIT_CAMERA
    )
    assert result.points[0] == pytest.approx([0.3, 0.1])
    assert result.valid.all()


def test_plane_depth_disparity_shrinks_with_distance() -> None:
    trajectory: PoseTrajectory = translation_trajectory([0.2, 0.0, 0.0], 0.2)
    transfer: PlaneTransfer = PlaneTransfer.build([[0.2, 0.1]], [0.1], trajectory, Pose.identity(0.0), UNIT_CAMERA)
    near: WarpResult = transfer.warp(0.5)
    far: WarpResult = transfer.warp(2.0)
    assert near.points[0] == pytest.approx([0.4, 0.1])
    assert far.points[0] == pytest.approx([0.25, 0.1])


def test_depth_is_unobservable_without_translation() -> None:
    times: NDArray[np.float64] = np.array([0.0, 0.1])
    rotations: Rotation = Rotation.from_rotvec([[0.0, 0.0, 0.0], [0.0, 0.05, 0.02]])
    trajectory: PoseTrajectory = PoseTrajectory.from_rotations(times, rotations)
    transfer: PlaneTransfer = PlaneTransfer.build(
        _random_pixels(25), np.linspace(0.0, 0.1, 25), trajectory, Pose.identity(), SMALL_CAMERA
    )
    assert transfer.warp(0.5).points == pytest.approx(transfer.warp(3.0).points)


def test_plane_depth_must_be_positive() -> None:
    transfer: PlaneTransfer = PlaneTransfer.build(
        [[1.0, 1.0]], [0.0], translation_trajectory([0.1, 0.0, 0.0], 0.1), Pose.identity(), SMALL_CAMERA
    )
    with pytest.raises(ParameterError, match="positive"):
        transfer.warp(0.0)


def test_warp_models_report_dimensions_and_scales() -> None:
    events: EventSlice = tiny_slice(6)
    flow: FlowWarp = FlowWarp()
    rotation: RotationWarp = RotationWarp(SMALL_CAMERA)
    homography: HomographyWarp = HomographyWarp(SMALL_CAMERA)
    assert (flow.dim, rotation.dim, homography.dim) == (2, 3, 8)
    assert flow.scales(events) == pytest.approx([200.0, 200.0])
    assert rotation.scales(events) == pytest.approx([2.0, 2.0, 2.0])
    assert homography.scales(events)[6:] == pytest.approx([0.05, 0.05])
    warped: WarpResult = flow.warp(events, np.zeros(2))
    assert warped.points == pytest.approx(events.points())
