"""Binary tensor container (".cten" files).

Layout, all little-endian:

    magic    4 bytes  b"CTEN"
    version  1 byte   = 1
    dtype    1 byte   0 = uint8, 1 = float32 (little-endian)
    rank     1 byte
    dims     rank x uint32
    payload  prod(dims) * itemsize bytes, row-major (C order)

Model-ready clips are uint8 arrays of shape [T, C, H, W]; decoded frames are
uint8 arrays of shape [H, W, C] (channels-last). Arrays are immutable by
convention once written; nothing here mutates its inputs.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

MAGIC = b"CTEN"
VERSION = 1
HEADER_FIXED_BYTES = 7  # magic + version + dtype + rank

_DTYPE_BY_CODE = {0: np.dtype(np.uint8), 1: np.dtype("<f4")}
_CODE_BY_KIND = {np.dtype(np.uint8): 0, np.dtype("<f4"): 1, np.dtype(">f4"): 1, np.dtype("=f4"): 1}

_U32_MAX = 0xFFFFFFFF


class TensorFormatError(ValueError):
    """Malformed container: bad magic or trailing bytes after the payload."""


class TensorTruncationError(TensorFormatError):
    """Stream ended before the declared payload was complete."""


class UnsupportedTensorError(TensorFormatError):
    """Unknown version or dtype code."""


class TensorWriteError(OSError):
    """Sink failed mid-write; `bytes_written` counts what made it out."""

    def __init__(self, message: str, bytes_written: int):
        super().__init__(message)
        self.bytes_written = bytes_written


def check_frame(frame: np.ndarray) -> np.ndarray:
    """Validate an [H, W, C] uint8 frame with C in {1, 3}."""
    if frame.ndim != 3 or frame.shape[2] not in (1, 3):
        raise ValueError(f"frame must be [H, W, C] with C in {{1, 3}}, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        raise ValueError(f"frame must be uint8, got {frame.dtype}")
    return frame


def check_clip(clip: np.ndarray) -> np.ndarray:
    """Validate a [T, C, H, W] uint8 clip."""
    if clip.ndim != 4:
        raise ValueError(f"clip must be [T, C, H, W], got shape {clip.shape}")
    if clip.dtype != np.uint8:
        raise ValueError(f"clip must be uint8, got {clip.dtype}")
    return clip


def _dtype_code(arr: np.ndarray) -> int:
    code = _CODE_BY_KIND.get(arr.dtype)
    if code is None:
        raise ValueError(f"unsupported dtype {arr.dtype}; only uint8 and float32 are stored")
    return code


def write_tensor(tensor: np.ndarray, sink: BinaryIO) -> int:
    """Serialize `tensor` to `sink`; returns the number of bytes written."""
    code = _dtype_code(tensor)
    rank = tensor.ndim
    for d in tensor.shape:
        if d > _U32_MAX:
            raise ValueError(f"dimension {d} does not fit in uint32")
    if code == 1:
        tensor = np.ascontiguousarray(tensor, dtype="<f4")
    else:
        tensor = np.ascontiguousarray(tensor)

    header = MAGIC + struct.pack("<BBB", VERSION, code, rank)
    header += struct.pack(f"<{rank}I", *tensor.shape)
    written = 0
    try:
        sink.write(header)
        written += len(header)
        payload = tensor.tobytes()
        sink.write(payload)
        written += len(payload)
    except OSError as exc:
        raise TensorWriteError(f"tensor write failed after {written} bytes: {exc}", written) from exc
    return written


def _read_exact(source: BinaryIO, n: int, what: str) -> bytes:
    data = source.read(n)
    if len(data) != n:
        raise TensorTruncationError(f"expected {n} bytes of {what}, got {len(data)}")
    return data


def read_tensor(source: BinaryIO) -> np.ndarray:
    """Parse one tensor from `source`; trailing bytes are an error."""
    magic = _read_exact(source, 4, "magic")
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version, code, rank = struct.unpack("<BBB", _read_exact(source, 3, "header"))
    if version != VERSION:
        raise UnsupportedTensorError(f"unsupported version {version}")
    dtype = _DTYPE_BY_CODE.get(code)
    if dtype is None:
        raise UnsupportedTensorError(f"unknown dtype code {code}")
    dims = struct.unpack(f"<{rank}I", _read_exact(source, 4 * rank, "dims"))
    count = 1
    for d in dims:
        count *= d
    payload = _read_exact(source, count * dtype.itemsize, "payload")
    if source.read(1):
        raise TensorFormatError("trailing bytes after payload")
    arr = np.frombuffer(payload, dtype=dtype, count=count).reshape(dims)
    return arr.copy()


def write_tensor_file(path: str | Path, tensor: np.ndarray) -> int:
    with open(path, "wb") as fh:
        return write_tensor(tensor, fh)


def read_tensor_file(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_tensor(fh)
