"""Flat binary checkpoint container for named parameter tensors.

Layout: magic ``NDM1``, one version byte, then per-tensor records until
EOF.  Each record is a little-endian u16 name length, the UTF-8 name, a
u8 rank, the extents as u64 little-endian, and the values as f64
little-endian IEEE-754 in row-major order.  Tensors are written sorted
by name so files are byte-reproducible.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"NDM1"
VERSION = 1


def save_tensors(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("B", VERSION))
        for name in sorted(tensors):
            arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
            enc = name.encode("utf-8")
            f.write(struct.pack("<H", len(enc)))
            f.write(enc)
            f.write(struct.pack("B", arr.ndim))
            for extent in arr.shape:
                f.write(struct.pack("<Q", extent))
            f.write(arr.astype("<f8").tobytes())


def load_tensors(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a parameter container (bad magic)")
    if data[4] != VERSION:
        raise ValueError(f"{path}: unsupported container version {data[4]}")
    out: dict[str, np.ndarray] = {}
    pos = 5
    while pos < len(data):
        (name_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos : pos + name_len].decode("utf-8")
        pos += name_len
        rank = data[pos]
        pos += 1
        shape = struct.unpack_from(f"<{rank}Q", data, pos) if rank else ()
        pos += 8 * rank
        count = int(np.prod(shape)) if rank else 1
        values = np.frombuffer(data, dtype="<f8", count=count, offset=pos)
        pos += 8 * count
        out[name] = values.reshape(shape).astype(np.float64)
    return out
