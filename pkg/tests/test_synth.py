import numpy as np
import pytest

from depthnormal import DepthMap, SceneSpec, add_noise, generate, vote_depth
from depthnormal.errors import ConfigError
from depthnormal.metrics import angle_errors
from depthnormal.synth import plane_depth, shade

from conftest import QQVGA, VGA, plane_scene


def test_fronto_plane():
    depth, normals = generate(SceneSpec("plane", 16, 12, QQVGA, {"normal": [0, 0, -1], "offset": 3.0}))
    assert depth.valid.all()
    np.testing.assert_array_equal(depth.z, 3.0)
    np.testing.assert_array_equal(normals.n, np.broadcast_to([0.0, 0.0, -1.0], (12, 16, 3)))


def test_plane_depth_formula():
    n = np.array([0.2, -0.4, -1.0])
    n /= np.linalg.norm(n)
    depth, normals = generate(SceneSpec("plane", 30, 20, QQVGA, {"normal": n.tolist(), "offset": 2.0}))
    # the same surface written as n' · p = d with n' = -n
    u, v = np.meshgrid(np.arange(30.0), np.arange(20.0))
    m = -n
    oracle = 2.0 / (m[0] * (u - QQVGA.cx) / QQVGA.fx + m[1] * (v - QQVGA.cy) / QQVGA.fy + m[2])
    np.testing.assert_allclose(depth.z, oracle, rtol=1e-14)
    np.testing.assert_allclose(normals.n[5, 5], n, atol=1e-15)


def test_sphere_centre_ray():
    c = np.array([(40 - QQVGA.cx) / QQVGA.fx * 3.0, (30 - QQVGA.cy) / QQVGA.fy * 3.0, 3.0])
    depth, normals = generate(SceneSpec("sphere", 80, 60, QQVGA, {"center": c.tolist(), "radius": 0.5}))
    ray = c / np.linalg.norm(c)
    np.testing.assert_allclose(normals.n[30, 40], -ray, atol=1e-12)
    assert depth.z[30, 40] == pytest.approx(3.0 - 0.5 / np.linalg.norm(c) * 3.0, rel=1e-12)
    assert not depth.valid.all()


def test_sphere_normals_face_camera():
    depth, normals = generate(SceneSpec("sphere", 80, 60, QQVGA, {"center": [0, 0, 2.0], "radius": 0.8}))
    u, v = np.meshgrid(np.arange(80.0), np.arange(60.0))
    p = np.stack([(u - QQVGA.cx) / QQVGA.fx, (v - QQVGA.cy) / QQVGA.fy, np.ones_like(u)], -1) * depth.z[..., None]
    assert np.all(np.einsum("...k,...k->...", normals.n, p)[depth.valid] <= 0)
    np.testing.assert_allclose(np.linalg.norm(p - [0, 0, 2.0], axis=-1)[depth.valid], 0.8, rtol=1e-12)


def test_step_and_wedge():
    depth, _ = generate(SceneSpec("step", 20, 10, QQVGA, {"near": 1.5, "far": 3.0, "split": 7}))
    assert np.all(depth.z[:, :7] == 1.5) and np.all(depth.z[:, 7:] == 3.0)
    depth, normals = generate(SceneSpec("wedge", 40, 20, QQVGA, {"apex": 3.0, "split": 20, "half_angle": 30}))
    assert depth.valid.all()
    assert angle_errors(normals.n[:, 0], normals.n[:, -1]).min() == pytest.approx(60.0)


def test_invisible_scene_rejected():
    with pytest.raises(ConfigError):
        generate(SceneSpec("sphere", 20, 20, QQVGA, {"center": [0, 0, -5.0], "radius": 1.0}))
    with pytest.raises(ConfigError):
        SceneSpec("cube", 2, 2, QQVGA)


def test_generation_is_deterministic():
    spec = SceneSpec("sphere", 50, 40, QQVGA, {"center": [0.1, 0, 2.0]}, noise_sigma_rel=0.01, seed=3)
    a, b = generate(spec), generate(spec)
    assert a[0].equals(b[0]) and a[1].equals(b[1])


def test_noise_free_identity_and_seeding():
    depth, _ = plane_scene()
    assert add_noise(depth, 0.0, 1).equals(depth)
    assert add_noise(depth, 0.02, 5).equals(add_noise(depth, 0.02, 5))
    assert not add_noise(depth, 0.02, 5).equals(add_noise(depth, 0.02, 6))


def test_noise_level():
    depth = DepthMap(np.full((480, 640), 2.0))
    noisy = add_noise(depth, 0.03, 0)
    assert np.std((noisy.z - depth.z) / depth.z) == pytest.approx(0.03, rel=0.05)
    assert np.all(noisy.z > 0)


def test_plane_scene_votes_are_consistent():
    depth, normals = plane_scene()
    rng = np.random.default_rng(0)
    for _ in range(50):
        i = tuple(rng.integers([0, 0], [120, 160]))
        j = (int(np.clip(i[0] + rng.integers(-8, 9), 0, 119)), int(np.clip(i[1] + rng.integers(-8, 9), 0, 159)))
        assert vote_depth(j, i, depth, normals, QQVGA) == pytest.approx(depth.z[i], rel=1e-9)


def test_spec_json_round_trip():
    spec = SceneSpec("plane", 64, 48, VGA, {"normal": [0, 0.1, -1], "offset": 2}, 0.01, 9)
    assert SceneSpec.from_dict(spec.to_dict()) == spec


def test_shaded_image_shows_step():
    depth, normals = generate(SceneSpec("step", 20, 10, QQVGA, {"near": 2.0, "far": 4.0}))
    img = shade(normals, depth)
    assert img[0, 0] == 255.0 and img[0, -1] == 127.5


def test_plane_depth_helper_matches_generate():
    depth, _ = plane_scene()
    np.testing.assert_array_equal(plane_depth(120, 160, QQVGA, (0.3, -0.2, -1.0), 2.5), depth.z)
