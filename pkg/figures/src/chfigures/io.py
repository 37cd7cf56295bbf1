"""Readers for the solver's two output formats.

Diagnostics CSV: header ``step,t,k_n,mass,energy,h1,h2,h3,omega_h1,hm1,
du_l2,du_hm1,solver_iters,residual`` followed by one row per accepted step.

Checkpoint: magic ``CHSEED1\\0``, little-endian u64 nx, u64 ny, f64 time,
then nx * ny f64 samples row-major.
"""
from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["CSV_COLUMNS", "MAGIC", "SchemaError", "BadCheckpoint", "Snapshot",
           "SnapshotColumn", "SnapshotManifest", "read_diagnostics_csv",
           "read_checkpoint", "write_checkpoint", "load_manifest"]

CSV_COLUMNS = ("step", "t", "k_n", "mass", "energy", "h1", "h2", "h3",
               "omega_h1", "hm1", "du_l2", "du_hm1", "solver_iters", "residual")

MAGIC = b"CHSEED1\x00"
_HEADER = struct.Struct("<QQd")


class SchemaError(ValueError):
    """CSV or manifest does not match the expected layout."""


class BadCheckpoint(ValueError):
    """File is not a valid checkpoint."""


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    """Load a diagnostics CSV into column arrays, validating the schema."""
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"diagnostics file not found: {p}")
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise SchemaError(
                f"{p}: header {header!r} does not match the diagnostics schema"
            )
        rows = [[float(x) for x in row] for row in reader]
    if not rows:
        raise SchemaError(f"{p}: no data rows; nothing to plot")
    table = np.asarray(rows, dtype=float)
    return {name: table[:, i] for i, name in enumerate(CSV_COLUMNS)}


def read_checkpoint(path) -> tuple[np.ndarray, float]:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + _HEADER.size:
        raise BadCheckpoint(f"{path}: too short for a checkpoint header")
    if raw[: len(MAGIC)] != MAGIC:
        raise BadCheckpoint(f"{path}: bad magic bytes")
    nx, ny, t = _HEADER.unpack_from(raw, len(MAGIC))
    body = raw[len(MAGIC) + _HEADER.size:]
    if len(body) != nx * ny * 8:
        raise BadCheckpoint(f"{path}: payload holds {len(body)} bytes, "
                            f"expected {nx * ny * 8}")
    return np.frombuffer(body, dtype="<f8").reshape(nx, ny).copy(), float(t)


def write_checkpoint(path, values: np.ndarray, t: float) -> None:
    v = np.ascontiguousarray(values, dtype="<f8")
    if v.ndim != 2:
        raise ValueError("checkpoint values must be a 2-D array")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(v.shape[0], v.shape[1], float(t)))
        fh.write(v.tobytes(order="C"))


@dataclass(frozen=True)
class Snapshot:
    time: float
    path: Path


@dataclass(frozen=True)
class SnapshotColumn:
    label: str
    snapshots: tuple[Snapshot, ...]


@dataclass(frozen=True)
class SnapshotManifest:
    columns: tuple[SnapshotColumn, ...]

    @property
    def times(self) -> tuple[float, ...]:
        """Sorted union of snapshot times across the columns."""
        return tuple(sorted({s.time for col in self.columns for s in col.snapshots}))


def load_manifest(path) -> SnapshotManifest:
    """Parse a snapshot manifest and verify the referenced files exist."""
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"manifest not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON ({exc})") from None
    try:
        columns = []
        for col in data["columns"]:
            snaps = tuple(
                Snapshot(time=float(s["time"]), path=(p.parent / s["path"]).resolve()
                         if not Path(s["path"]).is_absolute() else Path(s["path"]))
                for s in col["snapshots"]
            )
            columns.append(SnapshotColumn(label=str(col["label"]), snapshots=snaps))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{p}: malformed manifest ({exc!r})") from None
    if not columns:
        raise SchemaError(f"{p}: manifest lists no columns")
    manifest = SnapshotManifest(columns=tuple(columns))
    for col in manifest.columns:
        for snap in col.snapshots:
            if not snap.path.is_file():
                raise SchemaError(f"{p}: referenced checkpoint missing: {snap.path}")
    return manifest
