"""Normal-to-depth refinement by tangent-plane voting and kernel regression.

Every valid pixel ``j`` in the window of ``i`` whose normal satisfies
``n_j · n_i > alpha`` intersects the ray through pixel ``i`` with its own
tangent plane, producing the vote

    z'_ji = (n_j · p_j) / ((u_i - cx) n_jx / fx + (v_i - cy) n_jy / fy + n_jz).

Votes with ``|denominator| < 1e-8`` or ``z'_ji <= 0`` are rejected. Accepted
votes are averaged with the linear kernel ``K = n_j · n_i``. A pixel with no
accepted vote keeps its initial depth. No depth gate is applied here.
"""
import numpy as np

from ._jit import njit, resolve_backend
from .camera import CameraIntrinsics, unproject
from .config import GeoConfig
from .maps import DepthMap, NormalMap, check_same_shape

DENOM_EPS = 1e-8


@njit
def _n2d_numba(pts, z0, valid, nrm, nvalid, alpha, beta, fx, fy, cx, cy):
    H, W = valid.shape
    r = beta - 1
    out = z0.copy()
    for vi in range(H):
        for ui in range(W):
            if not (valid[vi, ui] and nvalid[vi, ui]):
                continue
            nix = nrm[vi, ui, 0]
            niy = nrm[vi, ui, 1]
            niz = nrm[vi, ui, 2]
            rx = (ui - cx) / fx
            ry = (vi - cy) / fy
            wsum = 0.0
            zsum = 0.0
            for dv in range(-r, r + 1):
                vj = vi + dv
                if vj < 0 or vj >= H:
                    continue
                for du in range(-r, r + 1):
                    uj = ui + du
                    if uj < 0 or uj >= W or not (valid[vj, uj] and nvalid[vj, uj]):
                        continue
                    njx = nrm[vj, uj, 0]
                    njy = nrm[vj, uj, 1]
                    njz = nrm[vj, uj, 2]
                    k = njx * nix + njy * niy + njz * niz
                    if not k > alpha:
                        continue
                    num = njx * pts[vj, uj, 0] + njy * pts[vj, uj, 1] + njz * pts[vj, uj, 2]
                    den = rx * njx + ry * njy + njz
                    if not abs(den) >= 1e-8:
                        continue
                    zv = num / den
                    if not zv > 0:
                        continue
                    wsum += k
                    zsum += k * zv
            if wsum > 0:
                out[vi, ui] = zsum / wsum
    return out


def _n2d_numpy(pts, z0, valid, nrm, nvalid, alpha, beta, fx, fy, cx, cy):
    H, W = valid.shape
    r = beta - 1
    both = valid & nvalid
    u = np.arange(W, dtype=np.float64)[None, :]
    v = np.arange(H, dtype=np.float64)[:, None]
    rx = np.broadcast_to((u - cx) / fx, (H, W))
    ry = np.broadcast_to((v - cy) / fy, (H, W))
    ppad = np.zeros((H + 2 * r, W + 2 * r, 3))
    ppad[r:r + H, r:r + W] = pts
    npad = np.zeros((H + 2 * r, W + 2 * r, 3))
    npad[r:r + H, r:r + W] = nrm
    bpad = np.zeros((H + 2 * r, W + 2 * r), dtype=bool)
    bpad[r:r + H, r:r + W] = both
    nix, niy, niz = nrm[..., 0], nrm[..., 1], nrm[..., 2]
    wsum = np.zeros((H, W))
    zsum = np.zeros((H, W))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for dv in range(-r, r + 1):
            for du in range(-r, r + 1):
                sl = (slice(r + dv, r + dv + H), slice(r + du, r + du + W))
                nj = npad[sl]
                pj = ppad[sl]
                njx, njy, njz = nj[..., 0], nj[..., 1], nj[..., 2]
                k = njx * nix + njy * niy + njz * niz
                num = njx * pj[..., 0] + njy * pj[..., 1] + njz * pj[..., 2]
                den = rx * njx + ry * njy + njz
                zv = num / den
                m = both & bpad[sl] & (k > alpha) & (np.abs(den) >= DENOM_EPS) & (zv > 0)
                np.add(wsum, k, out=wsum, where=m)
                np.add(zsum, k * zv, out=zsum, where=m)
        refined = zsum / wsum
    return np.where(both & (wsum > 0), refined, z0)


def normals_to_depth(depth_init: DepthMap, normals: NormalMap, intr: CameraIntrinsics,
                     cfg: GeoConfig = GeoConfig(), backend=None) -> DepthMap:
    """Kernel-regressed depth from coplanar neighbour votes; mask is preserved."""
    check_same_shape(depth_init, normals)
    cloud = unproject(depth_init, intr)
    kernel = _n2d_numba if resolve_backend(backend) == "numba" else _n2d_numpy
    z = kernel(np.ascontiguousarray(cloud.points), np.ascontiguousarray(depth_init.z),
               np.ascontiguousarray(depth_init.valid), np.ascontiguousarray(normals.n),
               np.ascontiguousarray(normals.valid), float(cfg.alpha), int(cfg.beta),
               intr.fx, intr.fy, intr.cx, intr.cy)
    return DepthMap(z, depth_init.valid)


def coplanar_neighborhood(normals: NormalMap, pixel, alpha, beta):
    """``(row, col)`` indices of the voting set of ``pixel``, raster order."""
    vi, ui = pixel
    if not normals.valid[vi, ui]:
        raise ValueError(f"pixel {pixel} is not valid")
    ni = normals.n[vi, ui]
    r = int(beta) - 1
    out = []
    for vj in range(max(vi - r, 0), min(vi + r, normals.height - 1) + 1):
        for uj in range(max(ui - r, 0), min(ui + r, normals.width - 1) + 1):
            if normals.valid[vj, uj]:
                nj = normals.n[vj, uj]
                if nj[0] * ni[0] + nj[1] * ni[1] + nj[2] * ni[2] > alpha:
                    out.append((vj, uj))
    return out


def vote_depth(j, i, depth: DepthMap, normals: NormalMap, intr: CameraIntrinsics):
    """Depth that pixel ``j``'s tangent plane assigns to pixel ``i``, or ``None`` if rejected."""
    vj, uj = j
    vi, ui = i
    if not (depth.valid[vj, uj] and normals.valid[vj, uj]):
        raise ValueError(f"voter {j} is not valid")
    zj = depth.z[vj, uj]
    xj = (uj - intr.cx) * zj / intr.fx
    yj = (vj - intr.cy) * zj / intr.fy
    njx, njy, njz = normals.n[vj, uj].tolist()
    num = njx * xj + njy * yj + njz * zj
    den = (ui - intr.cx) / intr.fx * njx + (vi - intr.cy) / intr.fy * njy + njz
    if not abs(den) >= DENOM_EPS:
        return None
    z = num / den
    if not z > 0:
        return None
    return z
