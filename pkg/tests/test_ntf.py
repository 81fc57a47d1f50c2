import struct

import numpy as np
import pytest

from numgen.ntf import NtfError, read_ntf, write_ntf


def test_round_trip(tmp_path, rng):
    arr = rng.standard_normal((3, 8, 5)).astype(np.float32)
    path = tmp_path / "t.ntf"
    write_ntf(path, arr)
    back = read_ntf(path)
    assert back.dtype == np.float32
    assert np.array_equal(back, arr)


def test_header_layout(tmp_path):
    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    path = tmp_path / "t.ntf"
    write_ntf(path, arr)
    raw = path.read_bytes()
    assert raw[:4] == b"NTF1"
    assert raw[4] == 0          # dtype code: float32 little-endian
    assert raw[5] == 2          # ndim
    assert raw[6:16] == b"\x00" * 10
    dims = struct.unpack("<2I", raw[16:24])
    assert dims == (2, 3)
    assert len(raw) == 16 + 8 + 6 * 4
    payload = np.frombuffer(raw[24:], dtype="<f4").reshape(2, 3)
    assert np.array_equal(payload, arr)


def test_one_dimensional(tmp_path):
    arr = np.array([1.5, -2.25], dtype=np.float32)
    write_ntf(tmp_path / "v.ntf", arr)
    assert np.array_equal(read_ntf(tmp_path / "v.ntf"), arr)


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ntf"
    path.write_bytes(b"XXXX" + b"\x00" * 20)
    with pytest.raises(NtfError):
        read_ntf(path)


def test_rejects_truncated_payload(tmp_path):
    path = tmp_path / "trunc.ntf"
    write_ntf(path, np.zeros((4, 4), dtype=np.float32))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(NtfError):
        read_ntf(path)


def test_float64_input_downcast(tmp_path):
    arr = np.array([[1.0, 2.0]], dtype=np.float64)
    write_ntf(tmp_path / "d.ntf", arr)
    back = read_ntf(tmp_path / "d.ntf")
    assert back.dtype == np.float32 and np.array_equal(back, arr.astype(np.float32))
