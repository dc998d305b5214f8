"""Binary and JSON serialization of :class:`CellGrid`.

Binary layout (all integers little-endian)::

    offset  size   field
    0       4      magic  b"CPGR"
    4       1      version (1)
    5       1      d
    6       1      flags: bit 0 = p present, bit 1 = seed present
    7       1      reserved (0)
    8       4*d    dims, uint32
    .       8*d    origin, int64
    .       8      p, float64 (0.0 when absent)
    .       8      seed, uint64 (0 when absent)
    .       ...    occupancy, row-major, np.packbits(bitorder="little")

The payload holds ``ceil(prod(dims) / 8)`` bytes; padding bits are zero.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import CubipercError
from .lattice import CellGrid

MAGIC = b"CPGR"
VERSION = 1
JSON_FORMAT = "cubiperc-grid"


class GridFormatError(CubipercError, ValueError):
    pass


def grid_to_bytes(grid: CellGrid) -> bytes:
    d = grid.d
    flags = (grid.p is not None) | ((grid.seed is not None) << 1)
    header = struct.pack("<4sBBBB", MAGIC, VERSION, d, flags, 0)
    header += struct.pack(f"<{d}I", *grid.dims)
    header += struct.pack(f"<{d}q", *grid.origin)
    header += struct.pack("<dQ", grid.p or 0.0, grid.seed or 0)
    payload = np.packbits(grid.occupancy.ravel(), bitorder="little").tobytes()
    return header + payload


def grid_from_bytes(data: bytes) -> CellGrid:
    try:
        magic, version, d, flags, _ = struct.unpack_from("<4sBBBB", data, 0)
    except struct.error as exc:
        raise GridFormatError("truncated grid header") from exc
    if magic != MAGIC:
        raise GridFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise GridFormatError(f"unsupported grid format version {version}")
    pos = 8
    dims = struct.unpack_from(f"<{d}I", data, pos)
    pos += 4 * d
    origin = struct.unpack_from(f"<{d}q", data, pos)
    pos += 8 * d
    p, seed = struct.unpack_from("<dQ", data, pos)
    pos += 16
    n = int(np.prod(dims))
    payload = np.frombuffer(data, dtype=np.uint8, offset=pos)
    if payload.size != (n + 7) // 8:
        raise GridFormatError(f"payload has {payload.size} bytes, expected {(n + 7) // 8}")
    bits = np.unpackbits(payload, count=n, bitorder="little").astype(bool)
    return CellGrid(
        bits.reshape(dims),
        origin,
        p if flags & 1 else None,
        seed if flags & 2 else None,
    )


def grid_to_json(grid: CellGrid) -> dict:
    return {
        "format": JSON_FORMAT,
        "version": VERSION,
        "d": grid.d,
        "dims": list(grid.dims),
        "origin": list(grid.origin),
        "p": grid.p,
        "seed": grid.seed,
        "cells": "".join("1" if b else "0" for b in grid.occupancy.ravel()),
    }


def grid_from_json(obj: dict) -> CellGrid:
    if obj.get("format") != JSON_FORMAT:
        raise GridFormatError("not a cubiperc grid document")
    dims = tuple(obj["dims"])
    bits = np.frombuffer(obj["cells"].encode("ascii"), dtype=np.uint8) == ord("1")
    if bits.size != int(np.prod(dims)):
        raise GridFormatError("cell string length does not match dims")
    return CellGrid(bits.reshape(dims), tuple(obj["origin"]), obj.get("p"), obj.get("seed"))


def save_grid(grid: CellGrid, path) -> None:
    path = Path(path)
    try:
        if path.suffix == ".json":
            path.write_text(json.dumps(grid_to_json(grid), indent=1) + "\n")
        else:
            path.write_bytes(grid_to_bytes(grid))
    except OSError as exc:
        raise OSError(f"cannot write grid to {path}: {exc}") from exc


def load_grid(path) -> CellGrid:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == MAGIC:
        return grid_from_bytes(data)
    return grid_from_json(json.loads(data))
