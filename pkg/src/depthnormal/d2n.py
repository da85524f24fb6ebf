"""Depth-to-normal transform by per-pixel least-squares plane fitting.

For pixel ``i`` the neighbourhood is every valid pixel ``j`` with
``|u_i - u_j| < beta``, ``|v_i - v_j| < beta`` and ``|z_i - z_j| < gamma * z_i``.
The stacked camera-space points ``A`` (K×3) are solved against the all-ones
vector, ``n ∝ (AᵀA + εI)⁻¹ Aᵀ1`` with ``ε = ridge_eps * trace(AᵀA) / 3``, and
the result is flipped to face the camera (``n · p <= 0``).

Moments are accumulated in raster order over the window so the numba loop,
the numpy offset loop and :func:`fit_normal_ls` agree bit for bit.
"""
import numpy as np

from ._jit import njit, resolve_backend
from .camera import CameraIntrinsics, unproject
from .config import GeoConfig
from .maps import DepthMap, NormalMap, PointCloud

# det(M) / (trace(M)/3)^3 below this is treated as singular
SINGULAR_RTOL = 1e-14


def _solve_moments(sxx, sxy, sxz, syy, syz, szz, sx, sy, sz, ridge_eps):
    # Cofactor solve of the symmetric 3×3 system; works on scalars and arrays.
    e = ridge_eps * ((sxx + syy + szz) / 3.0)
    a = sxx + e
    d = syy + e
    f = szz + e
    c00 = d * f - syz * syz
    c01 = sxz * syz - sxy * f
    c02 = sxy * syz - sxz * d
    c11 = a * f - sxz * sxz
    c12 = sxy * sxz - a * syz
    c22 = a * d - sxy * sxy
    det = a * c00 + sxy * c01 + sxz * c02
    nx = (c00 * sx + c01 * sy + c02 * sz) / det
    ny = (c01 * sx + c11 * sy + c12 * sz) / det
    nz = (c02 * sx + c12 * sy + c22 * sz) / det
    norm = np.sqrt(nx * nx + ny * ny + nz * nz)
    scale = (a + d + f) / 3.0
    return nx / norm, ny / norm, nz / norm, det, scale


_solve_moments_jit = njit(_solve_moments)


def _is_regular(det, scale, count):
    return (count >= 3) & (det > SINGULAR_RTOL * (scale * scale * scale))


_is_regular_jit = njit(_is_regular)


@njit
def _d2n_numba(pts, valid, beta, gamma, ridge_eps):
    H, W = valid.shape
    r = beta - 1
    out = np.zeros((H, W, 3))
    ok = np.zeros((H, W), dtype=np.bool_)
    for vi in range(H):
        for ui in range(W):
            if not valid[vi, ui]:
                continue
            zi = pts[vi, ui, 2]
            gate = gamma * zi
            sxx = 0.0
            sxy = 0.0
            sxz = 0.0
            syy = 0.0
            syz = 0.0
            szz = 0.0
            sx = 0.0
            sy = 0.0
            sz = 0.0
            count = 0
            for dv in range(-r, r + 1):
                vj = vi + dv
                if vj < 0 or vj >= H:
                    continue
                for du in range(-r, r + 1):
                    uj = ui + du
                    if uj < 0 or uj >= W or not valid[vj, uj]:
                        continue
                    zj = pts[vj, uj, 2]
                    if not abs(zi - zj) < gate:
                        continue
                    x = pts[vj, uj, 0]
                    y = pts[vj, uj, 1]
                    sxx += x * x
                    sxy += x * y
                    sxz += x * zj
                    syy += y * y
                    syz += y * zj
                    szz += zj * zj
                    sx += x
                    sy += y
                    sz += zj
                    count += 1
            nx, ny, nz, det, scale = _solve_moments_jit(sxx, sxy, sxz, syy, syz, szz, sx, sy, sz, ridge_eps)
            if not _is_regular_jit(det, scale, count) or not np.isfinite(nx + ny + nz):
                continue
            if nx * pts[vi, ui, 0] + ny * pts[vi, ui, 1] + nz * zi > 0:
                nx = -nx
                ny = -ny
                nz = -nz
            out[vi, ui, 0] = nx
            out[vi, ui, 1] = ny
            out[vi, ui, 2] = nz
            ok[vi, ui] = True
    return out, ok


def _d2n_numpy(pts, valid, beta, gamma, ridge_eps):
    H, W = valid.shape
    r = beta - 1
    pad = np.zeros((H + 2 * r, W + 2 * r, 3))
    pad[r:r + H, r:r + W] = pts
    vpad = np.zeros((H + 2 * r, W + 2 * r), dtype=bool)
    vpad[r:r + H, r:r + W] = valid
    zi = pts[..., 2]
    gate = gamma * zi
    sums = [np.zeros((H, W)) for _ in range(9)]
    count = np.zeros((H, W), dtype=np.int64)
    for dv in range(-r, r + 1):
        for du in range(-r, r + 1):
            win = pad[r + dv:r + dv + H, r + du:r + du + W]
            x, y, zj = win[..., 0], win[..., 1], win[..., 2]
            m = vpad[r + dv:r + dv + H, r + du:r + du + W] & valid & (np.abs(zi - zj) < gate)
            terms = (x * x, x * y, x * zj, y * y, y * zj, zj * zj, x, y, zj)
            for s, t in zip(sums, terms):
                np.add(s, t, out=s, where=m)
            count += m
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        nx, ny, nz, det, scale = _solve_moments(*sums, ridge_eps)
        ok = valid & _is_regular(det, scale, count) & np.isfinite(nx + ny + nz)
    out = np.stack([nx, ny, nz], axis=-1)
    flip = (nx * pts[..., 0] + ny * pts[..., 1] + nz * zi) > 0
    out[flip] = -out[flip]
    out[~ok] = 0.0
    return out, ok


def _check_window(cfg):
    if cfg.beta < 1:
        raise ValueError("beta must be >= 1")


def depth_to_normals(depth: DepthMap, intr: CameraIntrinsics, cfg: GeoConfig = GeoConfig(),
                     backend=None) -> NormalMap:
    """Least-squares tangent-plane normals for every valid depth pixel.

    Pixels whose neighbourhood has fewer than three points or whose normal
    equations are numerically singular come back invalid.
    """
    _check_window(cfg)
    cloud = unproject(depth, intr)
    kernel = _d2n_numba if resolve_backend(backend) == "numba" else _d2n_numpy
    n, ok = kernel(np.ascontiguousarray(cloud.points), np.ascontiguousarray(cloud.valid),
                   int(cfg.beta), float(cfg.gamma), float(cfg.ridge_eps))
    return NormalMap(n, ok, normalize=False)


def tangent_neighborhood(cloud: PointCloud, pixel, beta, gamma):
    """Points of the plane-fitting neighbourhood of ``pixel = (row, col)``, raster order."""
    vi, ui = pixel
    if not cloud.valid[vi, ui]:
        raise ValueError(f"pixel {pixel} is not valid")
    zi = cloud.points[vi, ui, 2]
    r = int(beta) - 1
    rows = []
    for vj in range(max(vi - r, 0), min(vi + r, cloud.height - 1) + 1):
        for uj in range(max(ui - r, 0), min(ui + r, cloud.width - 1) + 1):
            if cloud.valid[vj, uj] and abs(zi - cloud.points[vj, uj, 2]) < gamma * zi:
                rows.append(cloud.points[vj, uj])
    return np.array(rows).reshape(-1, 3)


def fit_normal_ls(points, ridge_eps=GeoConfig.ridge_eps):
    """Unit normal of the least-squares plane ``A n = 1`` or ``None`` if degenerate.

    The sign is whatever the solve produces; see :func:`orient_to_camera`.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("at least one point is required")
    s = [0.0] * 9
    for x, y, z in pts.tolist():
        s[0] += x * x
        s[1] += x * y
        s[2] += x * z
        s[3] += y * y
        s[4] += y * z
        s[5] += z * z
        s[6] += x
        s[7] += y
        s[8] += z
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        nx, ny, nz, det, scale = _solve_moments(*(np.float64(v) for v in s), float(ridge_eps))
    if not (_is_regular(det, scale, len(pts)) and np.isfinite(nx + ny + nz)):
        return None
    return np.array([nx, ny, nz])


def orient_to_camera(normal, point):
    """Flip ``normal`` so that it faces the camera centre; ties keep the input."""
    normal = np.asarray(normal, dtype=np.float64)
    if float(np.dot(normal, point)) > 0:
        return -normal
    return normal.copy()
