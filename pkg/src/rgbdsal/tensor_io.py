"""Binary tensor file transport.

Layout (little endian throughout):
  bytes 0-3   magic "SMT1"
  u32         version (currently 1)
  u32         ndim
  ndim * u32  dims
  payload     float32, row-major (last dim fastest)

The format is deliberately minimal so any consumer can read it with a few
lines of code; no compression, no chunking.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"SMT1"
VERSION = 1
MAX_NDIM = 8
MAX_ELEMENTS = 1 << 31


class TensorFormatError(Exception):
    """Base class for tensor file format violations."""


class MagicMismatchError(TensorFormatError):
    pass


class UnsupportedVersionError(TensorFormatError):
    pass


class DimOverflowError(TensorFormatError):
    pass


class TruncatedPayloadError(TensorFormatError):
    pass


def write_tensor(arr: np.ndarray, path: str | Path) -> None:
    """Write an array as a float32 tensor file."""
    arr = np.asarray(arr)
    if arr.ndim < 1 or arr.ndim > MAX_NDIM:
        raise DimOverflowError(f"ndim {arr.ndim} outside supported range 1..{MAX_NDIM}")
    if any(d < 1 for d in arr.shape):
        raise DimOverflowError(f"zero-sized dimension in shape {arr.shape}")
    if arr.size > MAX_ELEMENTS:
        raise DimOverflowError(f"{arr.size} elements exceeds limit {MAX_ELEMENTS}")
    header = MAGIC + struct.pack("<II", VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a tensor file back as a float32 array.

    Raises one of the TensorFormatError subclasses on a malformed file, so
    callers can tell a wrong-format file from a truncated transfer.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise TruncatedPayloadError(f"{path}: file shorter than fixed header")
    if raw[:4] != MAGIC:
        raise MagicMismatchError(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    version, ndim = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version}, expected {VERSION}")
    if ndim < 1 or ndim > MAX_NDIM:
        raise DimOverflowError(f"{path}: ndim {ndim} outside supported range 1..{MAX_NDIM}")
    if len(raw) < 12 + 4 * ndim:
        raise TruncatedPayloadError(f"{path}: header truncated before dims")
    dims = struct.unpack_from(f"<{ndim}I", raw, 12)
    if any(d < 1 for d in dims):
        raise DimOverflowError(f"{path}: zero-sized dimension in {dims}")
    count = 1
    for d in dims:
        count *= d
        if count > MAX_ELEMENTS:
            raise DimOverflowError(f"{path}: element count exceeds limit {MAX_ELEMENTS}")
    offset = 12 + 4 * ndim
    expected = count * 4
    actual = len(raw) - offset
    if actual < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {actual} bytes, {expected} required for dims {dims}"
        )
    if actual > expected:
        raise TensorFormatError(f"{path}: {actual - expected} trailing bytes after payload")
    data = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
    return data.reshape(dims).copy()
