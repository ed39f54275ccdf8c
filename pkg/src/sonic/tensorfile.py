"""Minimal binary tensor container.

Layout: magic ``SPT1`` (4 bytes), dtype code (1 byte: 1 = float32,
2 = float64), rank (1 byte), dims (rank x unsigned 32-bit little-endian),
then the payload, row-major little-endian. Round-trips are bitwise.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = ["TensorFormatError", "write_tensor", "read_tensor"]

MAGIC = b"SPT1"

_CODE_TO_DTYPE = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_KIND_TO_CODE = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}


class TensorFormatError(ValueError):
    """Raised for files that do not follow the tensor container layout."""


def write_tensor(path: str | Path, array: np.ndarray) -> None:
    arr = np.asarray(array)
    code = _KIND_TO_CODE.get(arr.dtype.newbyteorder("="))
    if code is None:
        raise ValueError(f"unsupported dtype {arr.dtype}; use float32 or float64")
    if arr.ndim < 1 or arr.ndim > 255:
        raise ValueError(f"rank must be 1..255, got {arr.ndim}")
    if any(d < 1 or d > 0xFFFFFFFF for d in arr.shape):
        raise ValueError(f"dims must be positive 32-bit integers, got {arr.shape}")
    header = MAGIC + bytes([code, arr.ndim]) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = np.ascontiguousarray(arr, dtype=_CODE_TO_DTYPE[code]).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_tensor(path: str | Path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 6 or data[:4] != MAGIC:
        raise TensorFormatError(f"{path}: not a tensor file (bad magic)")
    code, rank = data[4], data[5]
    dtype = _CODE_TO_DTYPE.get(code)
    if dtype is None:
        raise TensorFormatError(f"{path}: unknown dtype code {code}")
    header_end = 6 + 4 * rank
    if len(data) < header_end:
        raise TensorFormatError(f"{path}: truncated dimension header")
    dims = struct.unpack(f"<{rank}I", data[6:header_end])
    if any(d < 1 for d in dims):
        raise TensorFormatError(f"{path}: dims must be positive, got {dims}")
    count = int(np.prod(dims, dtype=np.int64))
    expected = header_end + count * dtype.itemsize
    if len(data) != expected:
        raise TensorFormatError(
            f"{path}: payload is {len(data) - header_end} bytes, "
            f"expected {expected - header_end}"
        )
    values = np.frombuffer(data, dtype=dtype, offset=header_end, count=count)
    return values.reshape(dims).astype(dtype.newbyteorder("="), copy=True)
