"""Geometric depth/normal refinement.

Least-squares normals from depth, kernel-regressed depth from normals, an
edge-aware four-direction propagator, and 2-D / 3-D evaluation metrics.
Hot loops run under numba; set ``DEPTHNORMAL_DISABLE_NUMBA=1`` for the
pure-numpy kernels.
"""
from ._jit import default_backend
from .camera import CameraIntrinsics, export_ply, unproject
from .config import GeoConfig
from .d2n import depth_to_normals, fit_normal_ls, orient_to_camera, tangent_neighborhood
from .edges import build_weight_maps, canny, propagate
from .maps import DepthMap, NormalMap, PointCloud
from .metrics import (DepthMetrics, NormalMetrics, depth_metrics, normal_metrics, three_dgm,
                      tv_denoise_normals)
from .n2d import coplanar_neighborhood, normals_to_depth, vote_depth
from .pipeline import blend, refine_iterate, refine_step
from .synth import SceneSpec, add_noise, generate

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics", "DepthMap", "NormalMap", "PointCloud", "GeoConfig", "SceneSpec",
    "DepthMetrics", "NormalMetrics", "unproject", "export_ply", "depth_to_normals",
    "fit_normal_ls", "orient_to_camera", "tangent_neighborhood", "coplanar_neighborhood",
    "vote_depth", "normals_to_depth", "canny", "build_weight_maps", "propagate", "blend",
    "refine_step", "refine_iterate", "depth_metrics", "normal_metrics", "tv_denoise_normals",
    "three_dgm", "generate", "add_noise", "default_backend",
]
