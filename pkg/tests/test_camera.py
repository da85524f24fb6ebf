import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from depthnormal import CameraIntrinsics, DepthMap, export_ply, unproject
from depthnormal.camera import read_ply_vertices
from depthnormal.errors import ConfigError, EmptyInputError


def test_principal_point_maps_to_optical_axis():
    intr = CameraIntrinsics(300.0, 310.0, 2.0, 1.0)
    z = np.ones((3, 4))
    z[1, 2] = 5.0
    cloud = unproject(DepthMap(z), intr)
    np.testing.assert_array_equal(cloud.points[1, 2], [0.0, 0.0, 5.0])


def test_hand_evaluated_point():
    # (u, v) = (10, 20), z = 2, f = 100, c = 0 -> (0.2, 0.4, 2)
    z = np.ones((21, 11))
    z[20, 10] = 2.0
    cloud = unproject(DepthMap(z), CameraIntrinsics(100.0, 100.0, 0.0, 0.0))
    np.testing.assert_allclose(cloud.points[20, 10], [0.2, 0.4, 2.0], rtol=0, atol=1e-15)


def test_invalid_pixels_carry_no_point():
    z = np.array([[1.0, np.nan], [0.0, 2.0]])
    cloud = unproject(DepthMap(z), CameraIntrinsics(1.0, 1.0, 0.0, 0.0))
    np.testing.assert_array_equal(cloud.valid, [[True, False], [False, True]])
    assert cloud.valid_points().shape == (2, 3)
    np.testing.assert_array_equal(cloud.points[0, 1], 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.floats(0.1, 50.0), st.integers(0, 2**32 - 1))
def test_scaling_depth_scales_points(h, w, s, seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.5, 10.0, (h, w))
    valid = rng.random((h, w)) > 0.2
    intr = CameraIntrinsics(*rng.uniform(50, 600, 2), *rng.uniform(-5, 15, 2))
    base = unproject(DepthMap(z, valid), intr)
    scaled = unproject(DepthMap(z * s, valid), intr)
    np.testing.assert_array_equal(scaled.valid, valid)
    np.testing.assert_allclose(scaled.points, base.points * s, rtol=1e-14, atol=1e-300)


def test_unproject_is_pixelwise():
    rng = np.random.default_rng(3)
    z = rng.uniform(1, 3, (6, 7))
    intr = CameraIntrinsics(80.0, 90.0, 3.0, 2.5)
    full = unproject(DepthMap(z), intr).points
    for v, u in [(0, 0), (5, 6), (2, 3)]:
        single = np.zeros_like(z)
        single[v, u] = z[v, u]
        np.testing.assert_array_equal(unproject(DepthMap(single), intr).points[v, u], full[v, u])


@pytest.mark.parametrize("fx, fy", [(0.0, 1.0), (1.0, -2.0)])
def test_rejects_non_positive_focal(fx, fy):
    with pytest.raises(ConfigError):
        CameraIntrinsics(fx, fy, 0.0, 0.0)


def test_rejects_empty_depth():
    with pytest.raises(EmptyInputError):
        DepthMap(np.zeros((0, 3)))


def test_intrinsics_from_dict_requires_all_keys():
    with pytest.raises(ConfigError, match="cy"):
        CameraIntrinsics.from_dict({"fx": 1, "fy": 1, "cx": 0})


def _ply(cloud, colors=None):
    buf = io.BytesIO()
    export_ply(cloud, buf, colors)
    return buf.getvalue()


def test_ply_vertex_count_matches_valid_mask():
    z = np.array([[1.0, 2.0], [0.0, 3.0]])
    data = _ply(unproject(DepthMap(z), CameraIntrinsics(1.0, 1.0, 0.5, 0.5)))
    assert b"element vertex 3\n" in data
    assert len(read_ply_vertices(io.BytesIO(data))) == 3


def test_ply_with_empty_mask_has_no_rows():
    cloud = unproject(DepthMap(np.zeros((2, 2))), CameraIntrinsics(1.0, 1.0, 0.0, 0.0))
    data = _ply(cloud)
    assert b"element vertex 0\n" in data
    assert data.endswith(b"end_header\n")


def test_ply_round_trip():
    rng = np.random.default_rng(11)
    z = rng.uniform(0.5, 8.0, (9, 13))
    z[rng.random(z.shape) < 0.3] = 0.0
    cloud = unproject(DepthMap(z), CameraIntrinsics(200.0, 210.0, 6.0, 4.0))
    rgb = rng.integers(0, 256, z.shape + (3,))
    rows = read_ply_vertices(io.BytesIO(_ply(cloud, rgb)))
    np.testing.assert_allclose(rows[:, :3], cloud.valid_points(), rtol=1e-8)
    np.testing.assert_array_equal(rows[:, 3:], rgb[cloud.valid])
    assert b"property uchar red" in _ply(cloud, rgb)


def test_ply_propagates_sink_errors():
    class Broken(io.BytesIO):
        def write(self, _):
            raise OSError("disk full")

    cloud = unproject(DepthMap(np.ones((2, 2))), CameraIntrinsics(1.0, 1.0, 0.0, 0.0))
    with pytest.raises(OSError, match="disk full"):
        export_ply(cloud, Broken())
