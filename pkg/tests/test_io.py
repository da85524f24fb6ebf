import io
import struct

import numpy as np
import pytest

from depthnormal import DepthMap, NormalMap
from depthnormal.errors import PFMFormatError, PFMHeaderError, PFMTruncatedError, ShapeMismatchError
from depthnormal.io import (read_pfm, read_residual_weights, write_pfm, write_residual_weights)


def _round_trip(m):
    buf = io.BytesIO()
    write_pfm(m, buf)
    buf.seek(0)
    return read_pfm(buf)


def test_depth_round_trip_is_bit_identical():
    rng = np.random.default_rng(0)
    z = rng.uniform(0.1, 20, (7, 5)).astype(np.float32).astype(np.float64)
    z[rng.random(z.shape) < 0.2] = np.nan
    d = DepthMap(z)
    back = _round_trip(d)
    assert isinstance(back, DepthMap)
    assert back.equals(d)


def test_normal_round_trip_is_bit_identical():
    rng = np.random.default_rng(1)
    n = rng.normal(size=(4, 6, 3)).astype(np.float32).astype(np.float64)
    m = NormalMap(n, rng.random((4, 6)) > 0.3, normalize=False)
    back = _round_trip(m)
    assert isinstance(back, NormalMap)
    assert back.equals(m)


def test_hand_built_little_endian_depth():
    # rows are stored bottom-to-top
    payload = struct.pack("<4f", 1.0, 2.0, 3.0, 4.0)
    d = read_pfm(io.BytesIO(b"Pf\n2 2\n-1.0\n" + payload))
    np.testing.assert_array_equal(d.z, [[3.0, 4.0], [1.0, 2.0]])


def test_big_endian_scale():
    payload = struct.pack(">2f", 5.0, 6.0)
    d = read_pfm(io.BytesIO(b"Pf\n2 1\n1.0\n" + payload))
    np.testing.assert_array_equal(d.z, [[5.0, 6.0]])


def test_written_header_and_layout():
    buf = io.BytesIO()
    write_pfm(DepthMap([[1.0, 2.0], [3.0, 4.0]]), buf)
    data = buf.getvalue()
    assert data.startswith(b"Pf\n2 2\n-1.0\n")
    assert struct.unpack("<4f", data[-16:]) == (3.0, 4.0, 1.0, 2.0)


def test_non_finite_and_sentinels_become_invalid():
    payload = struct.pack("<4f", float("nan"), 0.0, float("inf"), 2.0)
    d = read_pfm(io.BytesIO(b"Pf\n4 1\n-1\n" + payload))
    np.testing.assert_array_equal(d.valid, [[False, False, False, True]])


@pytest.mark.parametrize("blob, exc", [
    (b"P5\n2 2\n255\n", PFMFormatError),
    (b"", PFMHeaderError),
    (b"Pf\nx y\n-1\n", PFMHeaderError),
    (b"Pf\n2 2\nabc\n", PFMHeaderError),
    (b"Pf\n2 2\n0\n", PFMHeaderError),
    (b"Pf\n2 2\n-1\n" + b"\0" * 15, PFMTruncatedError),
    (b"PF\n1 1\n-1\n" + b"\0" * 8, PFMTruncatedError),
])
def test_malformed_files(blob, exc):
    with pytest.raises(exc):
        read_pfm(io.BytesIO(blob))


def test_distinct_error_types():
    assert len({PFMFormatError, PFMHeaderError, PFMTruncatedError}) == 3
    assert not issubclass(PFMTruncatedError, PFMHeaderError)


def test_residual_weights_round_trip():
    rng = np.random.default_rng(2)
    w = rng.uniform(-0.5, 0.5, (3, 5, 4)).astype(np.float32).astype(np.float64)
    buf = io.BytesIO()
    write_residual_weights(w, buf)
    assert buf.getvalue().startswith(b"Pf\n5 12\n")
    buf.seek(0)
    np.testing.assert_array_equal(read_residual_weights(buf, (3, 5)), w)
    buf.seek(0)
    with pytest.raises(ShapeMismatchError):
        read_residual_weights(buf, (4, 5))
