"""Binary checkpoint format for solution snapshots.

Layout: magic bytes ``CHSEED1\\0``, little-endian u64 nx, u64 ny, f64 time,
then nx * ny f64 samples in row-major order.  Deliberately trivial so any
post-processing tool can parse it.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = ["MAGIC", "BadCheckpoint", "write_checkpoint", "read_checkpoint"]

MAGIC = b"CHSEED1\x00"
_HEADER = struct.Struct("<QQd")


class BadCheckpoint(ValueError):
    """File is not a valid checkpoint."""


def write_checkpoint(path, values: np.ndarray, t: float) -> None:
    v = np.ascontiguousarray(values, dtype="<f8")
    if v.ndim != 2:
        raise ValueError("checkpoint values must be a 2-D array")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(v.shape[0], v.shape[1], float(t)))
        fh.write(v.tobytes(order="C"))


def read_checkpoint(path) -> tuple[np.ndarray, float]:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + _HEADER.size:
        raise BadCheckpoint(f"{path}: file too short for a checkpoint header")
    if raw[: len(MAGIC)] != MAGIC:
        raise BadCheckpoint(f"{path}: bad magic bytes")
    nx, ny, t = _HEADER.unpack_from(raw, len(MAGIC))
    body = raw[len(MAGIC) + _HEADER.size:]
    expected = nx * ny * 8
    if len(body) != expected:
        raise BadCheckpoint(f"{path}: payload holds {len(body)} bytes, expected {expected}")
    values = np.frombuffer(body, dtype="<f8").reshape(nx, ny).copy()
    return values, float(t)
