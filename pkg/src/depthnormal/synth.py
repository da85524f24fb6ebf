"""Synthetic scenes with analytic depth and normals.

Scenes are rendered by exact ray-surface intersection. The ray through pixel
``(u, v)`` is ``z * ((u - cx)/fx, (v - cy)/fy, 1)``, so the ray parameter is
the depth itself.

Plane parameters use the camera-facing convention: ``normal`` is the unit
normal pointing toward the camera and ``offset`` the perpendicular distance
from the camera centre, i.e. the surface ``normal · p = -offset``.

Noise uses numpy's PCG64 bit generator (``numpy.random.default_rng(seed)``),
which is portable across platforms.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics, pixel_grid
from .errors import ConfigError
from .maps import DepthMap, NormalMap

KINDS = ("plane", "sphere", "step", "wedge")


@dataclass(frozen=True)
class SceneSpec:
    kind: str
    width: int
    height: int
    intrinsics: CameraIntrinsics
    params: dict = field(default_factory=dict)
    noise_sigma_rel: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scene kind {self.kind!r}; expected one of {KINDS}")
        if self.width < 1 or self.height < 1:
            raise ConfigError("scene size must be positive")
        if self.noise_sigma_rel < 0:
            raise ConfigError("noise_sigma_rel must be >= 0")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        try:
            intr = d.pop("intrinsics")
            kind = d.pop("kind")
            width, height = d.pop("size")
        except KeyError as e:
            raise ConfigError(f"scene spec missing key {e.args[0]!r}") from None
        if not isinstance(intr, CameraIntrinsics):
            intr = CameraIntrinsics.from_dict(intr)
        return cls(kind=kind, width=int(width), height=int(height), intrinsics=intr,
                   params=dict(d.pop("params", {})),
                   noise_sigma_rel=float(d.pop("noise_sigma_rel", 0.0)),
                   seed=int(d.pop("seed", 0)))

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def to_dict(self):
        return {"kind": self.kind, "size": [self.width, self.height],
                "intrinsics": self.intrinsics.to_dict(), "params": dict(self.params),
                "noise_sigma_rel": self.noise_sigma_rel, "seed": self.seed}


def _rays(height, width, intr):
    u, v = pixel_grid(height, width)
    return np.stack([(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, np.ones_like(u)], axis=-1)


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if v.shape != (3,) or not np.isfinite(norm) or norm == 0:
        raise ConfigError(f"expected a non-zero 3-vector, got {v!r}")
    return v / norm


def _plane(rays, normal, offset):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = -offset / (rays @ normal)
    normals = np.broadcast_to(normal, rays.shape).copy()
    return z, normals


def plane_depth(height, width, intr, normal, offset):
    """Depth of the plane ``normal · p = -offset`` at every pixel (may be non-positive)."""
    return _plane(_rays(height, width, intr), _unit(normal), float(offset))[0]


def _orient(normals, rays):
    flip = np.einsum("...k,...k->...", normals, rays) > 0
    normals[flip] *= -1.0
    return normals


def _render(spec):
    H, W, intr, p = spec.height, spec.width, spec.intrinsics, spec.params
    rays = _rays(H, W, intr)
    if spec.kind == "plane":
        z, normals = _plane(rays, _unit(p.get("normal", (0.0, 0.0, -1.0))), float(p.get("offset", 2.0)))
    elif spec.kind == "sphere":
        c = np.asarray(p.get("center", (0.0, 0.0, 3.0)), dtype=np.float64)
        radius = float(p.get("radius", 1.0))
        if radius <= 0:
            raise ConfigError("sphere radius must be positive")
        rr = np.einsum("...k,...k->...", rays, rays)
        rc = rays @ c
        disc = rc * rc - rr * (c @ c - radius * radius)
        with np.errstate(invalid="ignore"):
            z = (rc - np.sqrt(disc)) / rr
        z[~(disc >= 0)] = np.nan
        normals = (rays * z[..., None] - c) / radius
    elif spec.kind == "step":
        near, far = float(p.get("near", 2.0)), float(p.get("far", 4.0))
        split = int(p.get("split", W // 2))
        z = np.where(np.arange(W)[None, :] < split, near, far) * np.ones((H, 1))
        normals = np.broadcast_to(np.array([0.0, 0.0, -1.0]), rays.shape).copy()
    else:  # wedge: two planes hinged on the vertical line through column `split` at depth `apex`
        apex = float(p.get("apex", 3.0))
        split = float(p.get("split", (W - 1) / 2))
        half = np.deg2rad(float(p.get("half_angle", 30.0)))
        x0 = (split - intr.cx) * apex / intr.fx
        hinge = np.array([x0, 0.0, apex])
        left_n = np.array([np.sin(half), 0.0, -np.cos(half)])
        right_n = np.array([-np.sin(half), 0.0, -np.cos(half)])
        zl, nl = _plane(rays, left_n, -float(left_n @ hinge))
        zr, nr = _plane(rays, right_n, -float(right_n @ hinge))
        left = (np.arange(W)[None, :] < split) * np.ones((H, 1), dtype=bool)
        z = np.where(left, zl, zr)
        normals = np.where(left[..., None], nl, nr)
    valid = np.isfinite(z) & (z > 0)
    if not valid.any():
        raise ConfigError(f"{spec.kind} scene has no visible surface")
    normals = _orient(normals, rays)
    return z, normals, valid


def generate(spec: SceneSpec):
    """Analytic ``(DepthMap, NormalMap)`` for ``spec``; noise (if any) is applied to depth only."""
    z, normals, valid = _render(spec)
    depth = DepthMap(z, valid)
    if spec.noise_sigma_rel > 0:
        depth = add_noise(depth, spec.noise_sigma_rel, spec.seed)
    return depth, NormalMap(normals, valid)


def add_noise(depth: DepthMap, sigma_rel, seed):
    """Multiplicative Gaussian noise ``z * (1 + N(0, sigma_rel))``, clamped positive."""
    if sigma_rel < 0:
        raise ConfigError("sigma_rel must be >= 0")
    if sigma_rel == 0:
        return DepthMap(depth.z, depth.valid)
    eps = np.random.default_rng(seed).normal(0.0, sigma_rel, size=depth.shape)
    z = depth.z * (1.0 + eps)
    z = np.maximum(z, 1e-6 * depth.z)
    return DepthMap(z, depth.valid)


def shade(normals: NormalMap, depth: DepthMap, light=(0.0, 0.0, 1.0)):
    """Grayscale rendering in [0, 255]: Lambertian shading with 1/z falloff.

    The falloff makes depth discontinuities between parallel surfaces visible
    to an edge detector. Invalid pixels are black.
    """
    light = _unit(light)
    lam = np.clip(-(normals.n @ light), 0.0, 1.0)
    zmin = depth.z[depth.valid].min()
    with np.errstate(divide="ignore", invalid="ignore"):
        img = 255.0 * lam * (zmin / depth.z)
    img[~(depth.valid & normals.valid)] = 0.0
    return np.clip(img, 0.0, 255.0)
