"""PFM, image and JSON helpers used by the command line.

PFM layout: a magic line (``Pf`` one channel, ``PF`` three channels), a
``width height`` line, a scale line whose sign gives the byte order (negative
means little-endian), then float32 rows stored bottom-to-top.

Invalid pixels are written as 0 (depth) or the zero vector (normals); on
read, non-finite values, non-positive depths and zero-length normals become
invalid.

Residual propagation weights (H×W×4) are stored as a single-channel PFM of
height 4·H whose four H-row blocks, top to bottom, hold the L→R, R→L, T→B and
B→T channels. The file stays readable by ordinary PFM tools.
"""
import json
import re
import sys

import numpy as np

from .errors import PFMFormatError, PFMHeaderError, PFMTruncatedError, ShapeMismatchError
from .maps import DepthMap, NormalMap

_DIMS = re.compile(rb"^\s*(\d+)\s+(\d+)\s*$")


def _read_header(stream):
    magic = stream.readline().rstrip(b"\r\n").strip()
    if not magic:
        raise PFMHeaderError("missing PFM magic line")
    if magic == b"Pf":
        channels = 1
    elif magic == b"PF":
        channels = 3
    else:
        raise PFMFormatError(f"unsupported image format {magic[:16]!r}; expected 'Pf' or 'PF'")
    dims = _DIMS.match(stream.readline())
    if dims is None:
        raise PFMHeaderError("malformed PFM dimension line")
    width, height = int(dims.group(1)), int(dims.group(2))
    try:
        scale = float(stream.readline().decode("ascii").strip())
    except (UnicodeDecodeError, ValueError):
        raise PFMHeaderError("malformed PFM scale line") from None
    if scale == 0 or not np.isfinite(scale):
        raise PFMHeaderError(f"PFM scale must be non-zero and finite, got {scale}")
    if width == 0 or height == 0:
        raise PFMHeaderError("PFM dimensions must be positive")
    return channels, width, height, ("<" if scale < 0 else ">")


def read_pfm_array(stream):
    """Raw grid as float64, top row first: H×W for ``Pf``, H×W×3 for ``PF``."""
    channels, width, height, order = _read_header(stream)
    count = width * height * channels
    payload = stream.read(4 * count)
    if len(payload) < 4 * count:
        raise PFMTruncatedError(f"PFM payload holds {len(payload)} bytes, expected {4 * count}")
    data = np.frombuffer(payload, dtype=order + "f4", count=count)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return np.flipud(data.reshape(shape)).astype(np.float64)


def write_pfm_array(arr, stream):
    arr = np.asarray(arr)
    if arr.ndim == 2:
        magic = b"Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"PF"
    else:
        raise PFMFormatError(f"cannot store an array of shape {arr.shape} as PFM")
    height, width = arr.shape[:2]
    stream.write(magic + b"\n" + f"{width} {height}\n".encode("ascii") + b"-1.0\n")
    stream.write(np.ascontiguousarray(np.flipud(arr), dtype="<f4").tobytes())


def read_pfm(stream):
    """``DepthMap`` for single-channel files, ``NormalMap`` for three-channel files."""
    arr = read_pfm_array(stream)
    if arr.ndim == 2:
        return DepthMap(arr)
    return NormalMap(arr, normalize=False)


def write_pfm(m, stream):
    if isinstance(m, DepthMap):
        write_pfm_array(m.z, stream)
    elif isinstance(m, NormalMap):
        write_pfm_array(m.n, stream)
    else:
        raise TypeError(f"expected DepthMap or NormalMap, got {type(m).__name__}")


def load_pfm(path, kind=None):
    with open(path, "rb") as f:
        m = read_pfm(f)
    if kind is not None and not isinstance(m, kind):
        want = "single-channel depth" if kind is DepthMap else "three-channel normal"
        raise PFMFormatError(f"{path}: expected a {want} PFM")
    return m


def save_pfm(m, path):
    with open(path, "wb") as f:
        write_pfm(m, f)


def read_residual_weights(stream, shape):
    """Residual weight maps for an image of ``shape = (H, W)`` as H×W×4."""
    arr = read_pfm_array(stream)
    H, W = shape
    if arr.ndim != 2 or arr.shape != (4 * H, W):
        raise ShapeMismatchError(f"residual weights must be a {W}x{4 * H} single-channel PFM, got {arr.shape}")
    return np.stack([arr[k * H:(k + 1) * H] for k in range(4)], axis=-1)


def write_residual_weights(w, stream):
    w = np.asarray(w)
    if w.ndim != 3 or w.shape[2] != 4:
        raise ShapeMismatchError(f"residual weights must be H×W×4, got {w.shape}")
    write_pfm_array(np.concatenate([w[..., k] for k in range(4)], axis=0), stream)


def load_gray(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64)


def load_rgb(path):
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64)


def save_gray(img, path):
    from PIL import Image

    Image.fromarray(np.clip(np.rint(img), 0, 255).astype(np.uint8)).save(path)


def load_json(path):
    with open(path) as f:
        return json.load(f)


def dump_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)
