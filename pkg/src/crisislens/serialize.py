"""Versioned binary container for model files.

Layout (all integers little-endian):

    magic   4 bytes  b"CLN1"
    u32     container version (currently 1)
    u64     metadata byte length, then that many bytes of UTF-8 JSON
    u32     tensor count
    per tensor:
        u32   name byte length, then the UTF-8 name
        u32   rank
        u64   per dimension: size
        f64   row-major values, little-endian

Round-trips are bit-exact: tensor payloads are raw float64 bytes and the
metadata JSON uses Python's shortest-round-trip float formatting.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"CLN1"
CONTAINER_VERSION = 1


def write_container(
    path: str | Path, metadata: dict, tensors: dict[str, np.ndarray]
) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", CONTAINER_VERSION))
    meta_bytes = json.dumps(metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
    buf.write(struct.pack("<Q", len(meta_bytes)))
    buf.write(meta_bytes)
    buf.write(struct.pack("<I", len(tensors)))
    for name, arr in tensors.items():
        name_bytes = name.encode("utf-8")
        buf.write(struct.pack("<I", len(name_bytes)))
        buf.write(name_bytes)
        arr = np.asarray(arr, dtype=np.float64)
        buf.write(struct.pack("<I", arr.ndim))
        for dim in arr.shape:
            buf.write(struct.pack("<Q", dim))
        buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(buf.getvalue())


class _Reader:
    def __init__(self, blob: bytes, path: str):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise FormatError(f"{self.path}: truncated model file (needed {n} more bytes)")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def read_container(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Parse a container; any corruption raises FormatError with no partial result."""
    blob = Path(path).read_bytes()
    r = _Reader(blob, str(path))
    if r.take(4) != MAGIC:
        raise FormatError(f"{path}: bad magic bytes, not a model file")
    version = r.u32()
    if version != CONTAINER_VERSION:
        raise FormatError(
            f"{path}: unsupported container version {version} (expected {CONTAINER_VERSION})"
        )
    meta_len = r.u64()
    try:
        metadata = json.loads(r.take(meta_len).decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: corrupt metadata block: {exc}") from exc
    n_tensors = r.u32()
    tensors: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        name_len = r.u32()
        name = r.take(name_len).decode("utf-8")
        rank = r.u32()
        shape = tuple(r.u64() for _ in range(rank))
        count = 1
        for d in shape:
            count *= d
        raw = r.take(8 * count)
        tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    if r.pos != len(blob):
        raise FormatError(f"{path}: {len(blob) - r.pos} trailing bytes after tensor section")
    return metadata, tensors
