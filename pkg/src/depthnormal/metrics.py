"""Depth and normal error metrics, TV denoising of normal maps, and 3DGM.

3DGM (3-D geometric metric) compares two depth maps through their geometry:
both are lifted to point clouds, turned into normals by the least-squares
plane fit, TV-denoised, and scored by angular error. Only the shape of the
surface matters, not its absolute scale.
"""
from dataclasses import asdict, dataclass

import numpy as np

from .camera import CameraIntrinsics
from .config import GeoConfig
from .d2n import depth_to_normals
from .errors import EmptyInputError
from .maps import DepthMap, NormalMap, check_same_shape

DELTA_BASE = 1.25
ANGLE_THRESHOLDS = (11.25, 22.5, 30.0)


@dataclass(frozen=True)
class DepthMetrics:
    rmse: float
    log10: float
    rel: float
    delta1: float
    delta2: float
    delta3: float
    count: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NormalMetrics:
    mean: float
    median: float
    rmse: float
    acc_1125: float
    acc_225: float
    acc_30: float
    count: int

    def to_dict(self):
        return asdict(self)


def depth_metrics(pred: DepthMap, gt: DepthMap) -> DepthMetrics:
    """Errors over pixels valid in both maps with positive depth on both sides."""
    check_same_shape(pred, gt)
    m = pred.valid & gt.valid & (pred.z > 0) & (gt.z > 0)
    if not m.any():
        raise EmptyInputError("no jointly valid depth pixels")
    z, g = pred.z[m], gt.z[m]
    diff = z - g
    ratio = np.maximum(z / g, g / z)
    return DepthMetrics(
        rmse=float(np.sqrt(np.mean(diff * diff))),
        log10=float(np.mean(np.abs(np.log10(z) - np.log10(g)))),
        rel=float(np.mean(np.abs(diff) / g)),
        delta1=float(np.mean(ratio < DELTA_BASE)),
        delta2=float(np.mean(ratio < DELTA_BASE ** 2)),
        delta3=float(np.mean(ratio < DELTA_BASE ** 3)),
        count=int(m.sum()),
    )


def angle_errors(a, b):
    """Angle in degrees between unit vectors on the last axis.

    ``atan2(|a × b|, a · b)`` equals ``arccos(a · b)`` for unit vectors but
    stays exact at 0° and 180° where ``arccos`` loses half the digits.
    """
    cross = np.cross(a, b)
    sin = np.sqrt(np.sum(cross * cross, axis=-1))
    cos = np.sum(a * b, axis=-1)
    return np.degrees(np.arctan2(sin, cos))


def summarize_angles(err) -> NormalMetrics:
    err = np.asarray(err, dtype=np.float64).ravel()
    if err.size == 0:
        raise EmptyInputError("no jointly valid normal pixels")
    ordered = np.sort(err)
    return NormalMetrics(
        mean=float(np.mean(err)),
        median=float(ordered[(err.size - 1) // 2]),  # lower middle for even counts
        rmse=float(np.sqrt(np.mean(err * err))),
        acc_1125=float(np.mean(err < ANGLE_THRESHOLDS[0])),
        acc_225=float(np.mean(err < ANGLE_THRESHOLDS[1])),
        acc_30=float(np.mean(err < ANGLE_THRESHOLDS[2])),
        count=int(err.size),
    )


def normal_metrics(pred: NormalMap, gt: NormalMap) -> NormalMetrics:
    check_same_shape(pred, gt)
    m = pred.valid & gt.valid
    return summarize_angles(angle_errors(pred.n[m], gt.n[m]))


def _grad(u, mx, my):
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = (u[:, 1:] - u[:, :-1]) * mx
    gy[:-1, :] = (u[1:, :] - u[:-1, :]) * my
    return gx, gy


def _div(px, py):
    # negative adjoint of _grad; px, py already vanish on masked links
    d = px.copy()
    d[:, 1:] -= px[:, :-1]
    d += py
    d[1:, :] -= py[:-1, :]
    return d


def tv_denoise_channel(f, strength, iters, valid=None, tau=0.125):
    """Chambolle's dual projection for ``min_u ||u - f||² / (2 strength) + TV(u)``.

    Finite differences are only taken between two valid pixels, so invalid
    pixels are untouched and never leak into the result.
    """
    f = np.asarray(f, dtype=np.float64)
    if strength == 0:
        return f.copy()
    valid = np.ones(f.shape, dtype=bool) if valid is None else valid
    mx = (valid[:, 1:] & valid[:, :-1]).astype(np.float64)
    my = (valid[1:, :] & valid[:-1, :]).astype(np.float64)
    px = np.zeros_like(f)
    py = np.zeros_like(f)
    for _ in range(iters):
        gx, gy = _grad(_div(px, py) - f / strength, mx, my)
        scale = 1.0 + tau * np.sqrt(gx * gx + gy * gy)
        px = (px + tau * gx) / scale
        py = (py + tau * gy) / scale
    return f - strength * _div(px, py)


def tv_denoise_normals(normals: NormalMap, strength=0.1, iters=30) -> NormalMap:
    """Per-channel TV denoising followed by renormalisation."""
    if strength < 0 or iters < 1:
        raise ValueError(f"need strength >= 0 and iters >= 1 (got {strength}, {iters})")
    if strength == 0:
        return NormalMap(normals.n, normals.valid, normalize=False)
    out = np.stack([tv_denoise_channel(normals.n[..., k], strength, int(iters), normals.valid)
                    for k in range(3)], axis=-1)
    return NormalMap(out, normals.valid)


def three_dgm(pred_depth: DepthMap, gt_depth: DepthMap, intr: CameraIntrinsics,
              cfg: GeoConfig = GeoConfig(), tv_strength=None, tv_iters=None,
              backend=None) -> NormalMetrics:
    """Angular agreement of the surfaces implied by two depth maps.

    Both maps go through the identical plane-fit and TV pipeline; pixels
    degenerate on either side are left out of the statistics.
    """
    check_same_shape(pred_depth, gt_depth)
    strength = cfg.tv_strength if tv_strength is None else tv_strength
    iters = cfg.tv_iters if tv_iters is None else tv_iters

    def surface(depth):
        return tv_denoise_normals(depth_to_normals(depth, intr, cfg, backend), strength, iters)

    return normal_metrics(surface(pred_depth), surface(gt_depth))
