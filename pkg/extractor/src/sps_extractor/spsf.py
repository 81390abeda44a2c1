"""Standalone .spsf writer/reader.

Deliberately independent of the scoring package: the extractor emits the
interchange format directly, and the scoring side's loader is the
cross-check. Layout: 16-byte header (magic "SPS1", u8 dtype code 0 = f32,
u8 ndim, 10 zero pad bytes), ndim u64 little-endian dims, then row-major
little-endian float32 payload.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

MAGIC = b"SPS1"


def write(arr: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if arr.ndim not in (1, 2) or any(d < 1 for d in arr.shape):
        raise ValueError(f"tensor must be rank 1 or 2 with positive dims, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite elements")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<BB", 0, arr.ndim))
        f.write(b"\x00" * 10)
        for d in arr.shape:
            f.write(struct.pack("<Q", d))
        f.write(arr.astype("<f4", copy=False).tobytes(order="C"))


def read(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(16)
        if header[:4] != MAGIC or header[4] != 0:
            raise ValueError(f"{path}: not an f32 .spsf file")
        ndim = header[5]
        shape = struct.unpack(f"<{ndim}Q", f.read(8 * ndim))
        count = int(np.prod(shape))
        arr = np.frombuffer(f.read(4 * count), dtype="<f4").reshape(shape)
    return arr.copy()  # frombuffer views are read-only


def fingerprint(path) -> str:
    """sha256 of the serialized bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
