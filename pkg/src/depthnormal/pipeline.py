"""One refinement step and the iterated loop.

A step cross-refines the two maps geometrically, blends each geometric
estimate with its input, then smooths both with the edge-aware propagator
using weight maps derived once from the guidance image.
"""
import numpy as np

from .camera import CameraIntrinsics
from .config import GeoConfig
from .d2n import depth_to_normals
from .edges import block_invalid, build_weight_maps, canny, propagate
from .errors import ShapeMismatchError
from .maps import DepthMap, NormalMap, check_same_shape
from .n2d import normals_to_depth


def blend(a, b, w):
    """``(1 - w) * a + w * b`` on pixels valid in ``a``.

    Works on depth and normal maps; blended normals are renormalised. Where
    ``b`` is invalid, or a normal blend cancels to zero, ``a`` is kept, so the
    output mask is always ``a``'s.
    """
    if type(a) is not type(b):
        raise TypeError("blend needs two maps of the same kind")
    check_same_shape(a, b)
    if not 0 <= w <= 1:
        raise ValueError(f"blend weight must lie in [0, 1], got {w}")
    use_b = a.valid & b.valid
    if isinstance(a, DepthMap):
        z = np.where(use_b, (1.0 - w) * a.z + w * b.z, a.z)
        return DepthMap(z, a.valid)
    mixed = (1.0 - w) * a.n + w * b.n
    norm = np.sqrt(np.sum(mixed * mixed, axis=-1))
    use_b &= norm > 0
    if w == 0:
        n = a.n
    elif w == 1:
        n = np.where(use_b[..., None], b.n, a.n)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            n = np.where(use_b[..., None], mixed / norm[..., None], a.n)
    return NormalMap(n, a.valid, normalize=False)


def weight_maps_for(image, cfg: GeoConfig, residual=None, backend=None):
    edges = canny(image, cfg.canny_low, cfg.canny_high, backend=backend)
    return build_weight_maps(edges, residual, cfg.base_w)


def _propagate_depth(depth, w, cfg, backend):
    z = propagate(depth.z, block_invalid(w, depth.valid), cfg.t_prop, cfg.recursive_within_pass,
                  backend=backend)
    return DepthMap(z, depth.valid)


def _propagate_normals(normals, w, cfg, backend):
    n = propagate(normals.n, block_invalid(w, normals.valid), cfg.t_prop, cfg.recursive_within_pass,
                  renormalize=True, backend=backend)
    return NormalMap(n, normals.valid, normalize=False)


def _check_inputs(depth, normals, image, weights):
    check_same_shape(depth, normals)
    if image is not None and np.shape(image) != depth.shape:
        raise ShapeMismatchError(f"image {np.shape(image)} does not match depth {depth.shape}")
    if weights is not None and np.shape(weights) != depth.shape + (4,):
        raise ShapeMismatchError(f"weights {np.shape(weights)} do not match depth {depth.shape}")


def refine_step(depth: DepthMap, normals: NormalMap, image, intr: CameraIntrinsics,
                cfg: GeoConfig = GeoConfig(), weights=None, backend=None):
    """One step; returns ``(depth, normals)``.

    ``weights`` (H×W×4) overrides the maps built from ``image``.
    """
    _check_inputs(depth, normals, image, weights)
    if weights is None:
        weights = weight_maps_for(image, cfg, backend=backend)
    n_geo = depth_to_normals(depth, intr, cfg, backend)
    z_geo = normals_to_depth(depth, normals, intr, cfg, backend)
    new_normals = _propagate_normals(blend(normals, n_geo, cfg.blend_w), weights, cfg, backend)
    new_depth = _propagate_depth(blend(depth, z_geo, cfg.blend_w), weights, cfg, backend)
    return new_depth, new_normals


def refine_iterate(depth: DepthMap, normals: NormalMap, image, intr: CameraIntrinsics,
                   cfg: GeoConfig = GeoConfig(), weights=None, residual=None, backend=None,
                   callback=None):
    """Apply :func:`refine_step` ``cfg.iterations`` times.

    Weight maps are built once. ``callback(k, depth, normals)`` is invoked
    after each step when given.
    """
    _check_inputs(depth, normals, image, weights)
    if weights is None:
        weights = weight_maps_for(image, cfg, residual, backend)
    for k in range(cfg.iterations):
        depth, normals = refine_step(depth, normals, image, intr, cfg, weights, backend)
        if callback is not None:
            callback(k + 1, depth, normals)
    return depth, normals
