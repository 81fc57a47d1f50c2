"""NTF1 tensor file format.

Layout:
  * 16-byte header: magic ``b"NTF1"``, u8 dtype code (0 = float32
    little-endian), u8 ndim, 10 zero bytes of padding
  * ndim little-endian u32 dimension sizes
  * row-major (C order) float32-LE payload
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"NTF1"
DTYPE_F32 = 0
_HEADER_LEN = 16


class NtfError(ValueError):
    pass


def write_ntf(path: str | Path, array: np.ndarray) -> None:
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim < 1:
        arr = arr.reshape(1)
    header = MAGIC + bytes([DTYPE_F32, arr.ndim]) + b"\x00" * 10
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(dims)
        f.write(arr.tobytes(order="C"))


def read_ntf(path: str | Path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(_HEADER_LEN)
        if len(header) != _HEADER_LEN or header[:4] != MAGIC:
            raise NtfError(f"{path}: not an NTF1 file")
        dtype_code, ndim = header[4], header[5]
        if dtype_code != DTYPE_F32:
            raise NtfError(f"{path}: unsupported dtype code {dtype_code}")
        dims = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
        payload = f.read()
    expected = int(np.prod(dims)) * 4
    if len(payload) != expected:
        raise NtfError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
