"""Pinhole camera model, depth unprojection and ASCII PLY export.

Pixel coordinates are zero-based ``(u, v) = (column, row)`` at pixel centres.
Intrinsics supplied by the caller must follow the same convention.
"""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, EmptyInputError
from .maps import DepthMap, PointCloud


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"intrinsics.{name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f"intrinsics.{name} must be finite")
            object.__setattr__(self, name, float(value))
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigError(f"focal lengths must be positive (fx={self.fx}, fy={self.fy})")

    @classmethod
    def from_dict(cls, d):
        missing = {"fx", "fy", "cx", "cy"} - set(d)
        if missing:
            raise ConfigError(f"intrinsics missing keys: {sorted(missing)}")
        return cls(d["fx"], d["fy"], d["cx"], d["cy"])

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def to_dict(self):
        return asdict(self)


def pixel_grid(height, width):
    """Return ``(u, v)`` float grids of column and row indices."""
    v, u = np.mgrid[0:height, 0:width].astype(np.float64)
    return u, v


def unproject(depth: DepthMap, intr: CameraIntrinsics) -> PointCloud:
    """Lift every valid depth pixel to camera coordinates.

    ``x = (u - cx) * z / fx`` and ``y = (v - cy) * z / fy``; invalid pixels
    carry the zero point and stay masked out.
    """
    if depth.z.size == 0:
        raise EmptyInputError("depth map is empty")
    u, v = pixel_grid(*depth.shape)
    z = depth.z
    pts = np.empty(depth.shape + (3,), dtype=np.float64)
    pts[..., 0] = (u - intr.cx) * z / intr.fx
    pts[..., 1] = (v - intr.cy) * z / intr.fy
    pts[..., 2] = z
    pts[~depth.valid] = 0.0
    pts.flags.writeable = False
    return PointCloud(pts, depth.valid)


def export_ply(cloud: PointCloud, sink, colors=None):
    """Write the valid points of ``cloud`` as an ASCII PLY to a binary stream.

    ``colors`` is an optional H×W×3 uint8-compatible array aligned with the
    lattice.
    """
    if cloud.points.size == 0:
        raise EmptyInputError("point cloud is empty")
    pts = cloud.points[cloud.valid]
    rgb = None
    if colors is not None:
        colors = np.asarray(colors)
        if colors.shape != cloud.points.shape:
            raise ConfigError(f"colour grid {colors.shape} does not match cloud {cloud.points.shape}")
        rgb = np.clip(np.rint(colors[cloud.valid]), 0, 255).astype(np.uint8)

    header = ["ply", "format ascii 1.0", f"element vertex {len(pts)}",
              "property float x", "property float y", "property float z"]
    if rgb is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    header.append("end_header")
    lines = header
    if rgb is None:
        lines += ["%.9g %.9g %.9g" % tuple(p) for p in pts.tolist()]
    else:
        lines += ["%.9g %.9g %.9g %d %d %d" % (*p, *c) for p, c in zip(pts.tolist(), rgb.tolist())]
    sink.write(("\n".join(lines) + "\n").encode("ascii"))


def read_ply_vertices(source):
    """Parse an ASCII PLY written by :func:`export_ply` into an N×k array."""
    text = source.read().decode("ascii")
    head, _, body = text.partition("end_header\n")
    count = None
    for line in head.splitlines():
        if line.startswith("element vertex"):
            count = int(line.split()[2])
    if count is None:
        raise ValueError("PLY header has no vertex element")
    rows = [line.split() for line in body.splitlines() if line.strip()]
    if len(rows) != count:
        raise ValueError(f"PLY declares {count} vertices but holds {len(rows)}")
    return np.array(rows, dtype=np.float64).reshape(count, -1)
