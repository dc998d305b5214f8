"""Cubical complexes built from cell grids.

Two constructions are provided:

* ``open`` mode is homotopy equivalent to the interior of the union of black
  cubes.  Vertices sit at black cell centres (stored by cell coordinate) and a
  k-face spanning axes ``A`` at anchor ``v`` exists iff the ``2**k`` cells
  ``v + eps`` (``eps`` in ``{0,1}^A``) are all black.  Diagonal neighbours are
  therefore not joined.
* ``closed`` mode is the union of the closed black unit cubes with all their
  faces; vertices are lattice corners and corner contact connects cells.

A face is identified by its lexicographically minimal vertex (the anchor) and
the sorted tuple of axes it extends along.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .lattice import CellGrid

MODES = ("open", "closed")


class FaceKey(NamedTuple):
    anchor: tuple[int, ...]
    axes: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    def boundary(self) -> list["FaceKey"]:
        """The ``2k`` codimension-one faces."""
        out = []
        for a in self.axes:
            rest = tuple(x for x in self.axes if x != a)
            out.append(FaceKey(self.anchor, rest))
            shifted = list(self.anchor)
            shifted[a] += 1
            out.append(FaceKey(tuple(shifted), rest))
        return out


def axis_subsets(d: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(d), k))


@dataclass(frozen=True)
class CubicalComplex:
    d: int
    mode: str
    faces: tuple[tuple[FaceKey, ...], ...]
    _index: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")

    @classmethod
    def empty(cls, d: int, mode: str = "open") -> "CubicalComplex":
        return cls(d, mode, tuple(() for _ in range(d + 1)))

    def face_counts(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.faces)

    def is_empty(self) -> bool:
        return not self.faces[0]

    def index(self, k: int) -> dict[FaceKey, int]:
        if self._index is None:
            object.__setattr__(
                self, "_index", [{f: i for i, f in enumerate(fs)} for fs in self.faces]
            )
        return self._index[k]

    def __contains__(self, face: FaceKey) -> bool:
        k = len(face.axes)
        return 0 <= k <= self.d and face in self.index(k)

    def is_closed_under_faces(self) -> bool:
        for k in range(1, self.d + 1):
            lower = self.index(k - 1)
            for f in self.faces[k]:
                if any(g not in lower for g in f.boundary()):
                    return False
        return True

    def dump(self) -> str:
        """One face per line: ``k anchor axes`` with comma-separated vectors.

        An empty axis set is written as ``-``.
        """
        lines = []
        for k, fs in enumerate(self.faces):
            for f in fs:
                axes = ",".join(map(str, f.axes)) or "-"
                lines.append(f"{k} {','.join(map(str, f.anchor))} {axes}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def parse(cls, text: str, d: int, mode: str = "open") -> "CubicalComplex":
        faces = [[] for _ in range(d + 1)]
        for line in text.splitlines():
            if not line.strip():
                continue
            k, anchor, axes = line.split()
            axes_t = () if axes == "-" else tuple(int(a) for a in axes.split(","))
            faces[int(k)].append(FaceKey(tuple(int(a) for a in anchor.split(",")), axes_t))
        return cls(d, mode, tuple(tuple(sorted(fs)) for fs in faces))


def _anchors(mask: np.ndarray, offset) -> list[tuple[int, ...]]:
    return [tuple(int(i) + o for i, o in zip(idx, offset)) for idx in np.argwhere(mask)]


def _shift_view(padded: np.ndarray, shift, shape) -> np.ndarray:
    return padded[tuple(slice(s, s + n) for s, n in zip(shift, shape))]


def build_open_complex(grid: CellGrid) -> CubicalComplex:
    """Complex on black cell centres, homotopy equivalent to open ``Phi``."""
    occ = grid.occupancy
    d = grid.d
    padded = np.pad(occ, [(0, 1)] * d)
    faces = []
    for k in range(d + 1):
        fk = []
        for axes in axis_subsets(d, k):
            mask = occ.copy()
            for bits in itertools.product((0, 1), repeat=k):
                if not any(bits):
                    continue
                shift = [0] * d
                for a, b in zip(axes, bits):
                    shift[a] = b
                mask &= _shift_view(padded, shift, occ.shape)
            fk.extend(FaceKey(v, axes) for v in _anchors(mask, grid.origin))
        faces.append(tuple(sorted(fk)))
    return CubicalComplex(d, "open", tuple(faces))


def build_closed_complex(grid: CellGrid) -> CubicalComplex:
    """Complex of the union of closed black unit cubes."""
    occ = grid.occupancy
    d = grid.d
    padded = np.pad(occ, [(1, 1)] * d)
    faces = []
    for k in range(d + 1):
        fk = []
        for axes in axis_subsets(d, k):
            free = [a for a in range(d) if a not in axes]
            shape = tuple(n if a in axes else n + 1 for a, n in enumerate(occ.shape))
            mask = np.zeros(shape, dtype=bool)
            # Face (v, A) lies in cell z with z_a = v_a on A and z_i in {v_i - 1, v_i} off A.
            for bits in itertools.product((0, 1), repeat=len(free)):
                shift = [1] * d
                for a, b in zip(free, bits):
                    shift[a] = 1 - b
                mask |= _shift_view(padded, shift, shape)
            fk.extend(FaceKey(v, axes) for v in _anchors(mask, grid.origin))
        faces.append(tuple(sorted(fk)))
    return CubicalComplex(d, "closed", tuple(faces))


def build_complex(grid: CellGrid, mode: str) -> CubicalComplex:
    if mode == "open":
        return build_open_complex(grid)
    if mode == "closed":
        return build_closed_complex(grid)
    raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def euler_characteristic(cx: CubicalComplex) -> int:
    return sum((-1) ** k * n for k, n in enumerate(cx.face_counts()))
