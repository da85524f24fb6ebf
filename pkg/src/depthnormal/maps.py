"""Lattice containers: depth maps, normal maps and point clouds.

Each container owns a float64 grid and a boolean validity mask. Entries under
an invalid mask are canonicalised to zero so that equal maps compare
bit-identical regardless of how they were produced.
"""
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeMismatchError


def _as_mask(valid, shape):
    if valid is None:
        return np.ones(shape, dtype=bool)
    valid = np.asarray(valid, dtype=bool)
    if valid.shape != shape:
        raise ShapeMismatchError(f"mask shape {valid.shape} does not match grid {shape}")
    return valid.copy()


@dataclass(frozen=True, eq=False)
class DepthMap:
    z: np.ndarray
    valid: np.ndarray

    def __init__(self, z, valid=None):
        z = np.array(z, dtype=np.float64)
        if z.ndim != 2:
            raise ShapeMismatchError(f"depth grid must be 2-D, got shape {z.shape}")
        if z.size == 0:
            raise EmptyInputError("depth map is empty")
        mask = _as_mask(valid, z.shape)
        mask &= np.isfinite(z) & (z > 0)
        z[~mask] = 0.0
        z.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "valid", mask)

    @property
    def height(self):
        return self.z.shape[0]

    @property
    def width(self):
        return self.z.shape[1]

    @property
    def shape(self):
        return self.z.shape

    def scaled(self, s):
        return DepthMap(self.z * s, self.valid)

    def equals(self, other):
        return np.array_equal(self.valid, other.valid) and np.array_equal(self.z, other.z)


@dataclass(frozen=True, eq=False)
class NormalMap:
    """H×W×3 unit normals. Vectors with zero or non-finite norm are invalid."""

    n: np.ndarray
    valid: np.ndarray

    def __init__(self, n, valid=None, normalize=True):
        n = np.array(n, dtype=np.float64)
        if n.ndim != 3 or n.shape[2] != 3:
            raise ShapeMismatchError(f"normal grid must be H×W×3, got shape {n.shape}")
        if n.shape[0] == 0 or n.shape[1] == 0:
            raise EmptyInputError("normal map is empty")
        mask = _as_mask(valid, n.shape[:2])
        norm = np.sqrt(n[..., 0] * n[..., 0] + n[..., 1] * n[..., 1] + n[..., 2] * n[..., 2])
        mask &= np.isfinite(norm) & (norm > 0)
        if normalize:
            n[mask] /= norm[mask][:, None]
        n[~mask] = 0.0
        n.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "valid", mask)

    @property
    def height(self):
        return self.n.shape[0]

    @property
    def width(self):
        return self.n.shape[1]

    @property
    def shape(self):
        return self.n.shape[:2]

    def equals(self, other):
        return np.array_equal(self.valid, other.valid) and np.array_equal(self.n, other.n)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Per-pixel 3-D points on the image lattice (H×W×3, meters)."""

    points: np.ndarray
    valid: np.ndarray

    @property
    def height(self):
        return self.points.shape[0]

    @property
    def width(self):
        return self.points.shape[1]

    def valid_points(self):
        return self.points[self.valid]


def check_same_shape(*maps):
    shapes = {tuple(m.shape) for m in maps}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"maps disagree in shape: {sorted(shapes)}")
