"""Canny edges, direction weight maps and the four-sweep recursive propagator.

Weight channels are ordered ``(L→R, R→L, T→B, B→T)``. A sweep updates each
pixel as ``(1 - w) * predecessor + w * current``, so ``w = 1`` blocks
propagation completely. Arrays are indexed ``[row, col]``. The first pixel of
every sweep has no predecessor and keeps its value.
"""
import numpy as np
from scipy import ndimage

from ._jit import njit, resolve_backend
from .errors import EmptyInputError, ShapeMismatchError

GAUSS_SIGMA = 1.4
TAN_22_5 = np.tan(np.deg2rad(22.5))
TAN_67_5 = np.tan(np.deg2rad(67.5))
# gradient magnitudes below this are rounding residue of the float filters
MAG_FLOOR = 1e-9

L2R, R2L, T2B, B2T = range(4)


def gaussian_kernel(size=5, sigma=GAUSS_SIGMA):
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(ax * ax) / (2 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


def gradients(img):
    smooth = ndimage.correlate(np.asarray(img, dtype=np.float64), gaussian_kernel(), mode="nearest")
    gx = ndimage.correlate(smooth, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(smooth, SOBEL_Y, mode="nearest")
    return gx, gy


@njit
def _nms_numba(mag, gx, gy, tan_lo, tan_hi):
    H, W = mag.shape
    out = np.zeros((H, W), dtype=np.bool_)
    for r in range(H):
        for c in range(W):
            m = mag[r, c]
            if m == 0.0:
                continue
            ax = abs(gx[r, c])
            ay = abs(gy[r, c])
            if ay <= tan_lo * ax:
                r1, c1, r2, c2 = r, c - 1, r, c + 1
            elif ay > tan_hi * ax:
                r1, c1, r2, c2 = r - 1, c, r + 1, c
            elif (gx[r, c] > 0) == (gy[r, c] > 0):
                r1, c1, r2, c2 = r - 1, c - 1, r + 1, c + 1
            else:
                r1, c1, r2, c2 = r - 1, c + 1, r + 1, c - 1
            m1 = mag[r1, c1] if 0 <= r1 < H and 0 <= c1 < W else 0.0
            m2 = mag[r2, c2] if 0 <= r2 < H and 0 <= c2 < W else 0.0
            out[r, c] = m > m1 and m >= m2
    return out


def _nms_numpy(mag, gx, gy, tan_lo, tan_hi):
    H, W = mag.shape
    pad = np.zeros((H + 2, W + 2))
    pad[1:-1, 1:-1] = mag

    def at(dr, dc):
        return pad[1 + dr:1 + dr + H, 1 + dc:1 + dc + W]

    ax, ay = np.abs(gx), np.abs(gy)
    horiz = ay <= tan_lo * ax
    vert = ~horiz & (ay > tan_hi * ax)
    diag = ~horiz & ~vert
    same = (gx > 0) == (gy > 0)
    m1 = np.select([horiz, vert, diag & same], [at(0, -1), at(-1, 0), at(-1, -1)], at(-1, 1))
    m2 = np.select([horiz, vert, diag & same], [at(0, 1), at(1, 0), at(1, 1)], at(1, -1))
    return (mag != 0.0) & (mag > m1) & (mag >= m2)


def non_max_suppression(mag, gx, gy, backend=None):
    """Keep pixels that are local maxima across the quantised gradient direction.

    Ties are broken asymmetrically (strictly greater than the first neighbour,
    not less than the second) so a symmetric ridge yields a one-pixel line.
    """
    kernel = _nms_numba if resolve_backend(backend) == "numba" else _nms_numpy
    return kernel(np.ascontiguousarray(mag), np.ascontiguousarray(gx), np.ascontiguousarray(gy),
                  float(TAN_22_5), float(TAN_67_5))


def default_thresholds(img):
    mean = float(np.mean(img))
    return mean, 2.0 * mean


def canny(img, low=None, high=None, backend=None):
    """Boolean edge mask of a grayscale image with intensities in [0, 255].

    Gaussian smoothing (5×5, sigma 1.4), Sobel gradients, non-maximum
    suppression and hysteresis: pixels with magnitude above ``high`` seed
    edges that grow through 8-connected pixels above ``low``. ``None``
    thresholds default to the image mean and twice the mean.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise EmptyInputError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    d_low, d_high = default_thresholds(img)
    low = d_low if low is None else float(low)
    high = d_high if high is None else float(high)
    if low > high:
        raise ValueError(f"low threshold {low} exceeds high threshold {high}")
    gx, gy = gradients(img)
    mag = np.hypot(gx, gy)
    mag[mag < MAG_FLOOR] = 0.0
    thin = non_max_suppression(mag, gx, gy, backend)
    weak = thin & (mag > low)
    strong = thin & (mag > high)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.unique(labels[strong])
    return np.isin(labels, keep[keep > 0])


def build_weight_maps(edges, residual=None, base_w=0.7):
    """H×W×4 propagation weights ``clip(base_w + edge * (1 - base_w) + residual, 0, 1)``."""
    edges = np.asarray(edges, dtype=bool)
    if not 0 <= base_w <= 1:
        raise ValueError(f"base_w must lie in [0, 1], got {base_w}")
    w = base_w + edges.astype(np.float64) * (1.0 - base_w)
    w = np.repeat(w[..., None], 4, axis=-1)
    if residual is not None:
        residual = np.asarray(residual, dtype=np.float64)
        if residual.shape != w.shape:
            raise ShapeMismatchError(f"residual {residual.shape} does not match weight maps {w.shape}")
        w = w + residual
    return np.clip(w, 0.0, 1.0)


def block_invalid(w, valid):
    """Set weights to 1 wherever a pixel or its sweep predecessor is invalid.

    Invalid pixels then neither change nor leak into their neighbours.
    """
    w = np.array(w, dtype=np.float64)
    valid = np.asarray(valid, dtype=bool)
    bad = ~valid
    w[bad] = 1.0
    w[:, 1:, L2R][bad[:, :-1]] = 1.0
    w[:, :-1, R2L][bad[:, 1:]] = 1.0
    w[1:, :, T2B][bad[:-1, :]] = 1.0
    w[:-1, :, B2T][bad[1:, :]] = 1.0
    return w


@njit
def _sweeps_numba(x, w, recursive):
    H, W, C = x.shape
    s = x.copy()
    # L->R
    prev = s.copy()
    for r in range(H):
        for c in range(1, W):
            a = w[r, c, 0]
            for k in range(C):
                p = s[r, c - 1, k] if recursive else prev[r, c - 1, k]
                s[r, c, k] = (1.0 - a) * p + a * s[r, c, k]
    # R->L
    prev = s.copy()
    for r in range(H):
        for c in range(W - 2, -1, -1):
            a = w[r, c, 1]
            for k in range(C):
                p = s[r, c + 1, k] if recursive else prev[r, c + 1, k]
                s[r, c, k] = (1.0 - a) * p + a * s[r, c, k]
    # T->B
    prev = s.copy()
    for r in range(1, H):
        for c in range(W):
            a = w[r, c, 2]
            for k in range(C):
                p = s[r - 1, c, k] if recursive else prev[r - 1, c, k]
                s[r, c, k] = (1.0 - a) * p + a * s[r, c, k]
    # B->T
    prev = s.copy()
    for r in range(H - 2, -1, -1):
        for c in range(W):
            a = w[r, c, 3]
            for k in range(C):
                p = s[r + 1, c, k] if recursive else prev[r + 1, c, k]
                s[r, c, k] = (1.0 - a) * p + a * s[r, c, k]
    return s


def _sweeps_numpy(x, w, recursive):
    s = x.copy()
    H, W, _ = s.shape
    for ch, axis, order in ((L2R, 1, range(1, W)), (R2L, 1, range(W - 2, -1, -1)),
                            (T2B, 0, range(1, H)), (B2T, 0, range(H - 2, -1, -1))):
        step = -1 if ch in (L2R, T2B) else 1
        a = w[..., ch:ch + 1]
        if recursive:
            for idx in order:
                cur = (slice(None), idx) if axis == 1 else (idx,)
                pre = (slice(None), idx + step) if axis == 1 else (idx + step,)
                s[cur] = (1.0 - a[cur]) * s[pre] + a[cur] * s[cur]
        else:
            prev = s.copy()
            if axis == 1:
                cur = (slice(None), slice(1, None)) if step == -1 else (slice(None), slice(None, -1))
                pre = (slice(None), slice(None, -1)) if step == -1 else (slice(None), slice(1, None))
            else:
                cur = (slice(1, None),) if step == -1 else (slice(None, -1),)
                pre = (slice(None, -1),) if step == -1 else (slice(1, None),)
            s[cur] = (1.0 - a[cur]) * prev[pre] + a[cur] * prev[cur]
    return s


def _renormalize(s):
    norm = np.sqrt(s[..., 0] * s[..., 0] + s[..., 1] * s[..., 1] + s[..., 2] * s[..., 2])
    ok = norm > 0
    s[ok] /= norm[ok][:, None]
    return s


def propagate(x, w, t_prop=3, recursive_within_pass=True, renormalize=False, backend=None):
    """Run ``t_prop`` cascades of the L→R, R→L, T→B, B→T sweeps over ``x``.

    ``x`` is H×W or H×W×C; ``w`` is H×W×4 with entries in [0, 1]. With
    ``recursive_within_pass`` each pixel blends with the already-updated
    predecessor; otherwise with the value from before the sweep. When
    ``renormalize`` is set the last axis is rescaled to unit length after
    every cascade (for normal maps).
    """
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[..., None]
    w = np.asarray(w, dtype=np.float64)
    if x.ndim != 3 or w.shape != x.shape[:2] + (4,):
        raise ShapeMismatchError(f"signal {x.shape} and weights {w.shape} disagree")
    if t_prop < 1:
        raise ValueError(f"t_prop must be >= 1, got {t_prop}")
    kernel = _sweeps_numba if resolve_backend(backend) == "numba" else _sweeps_numpy
    s = np.ascontiguousarray(x)
    w = np.ascontiguousarray(w)
    for _ in range(int(t_prop)):
        s = kernel(s, w, bool(recursive_within_pass))
        if renormalize:
            s = _renormalize(s)
    return s[..., 0] if squeeze else s
