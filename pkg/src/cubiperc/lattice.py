"""Cell-grid geometry, Bernoulli colorings and the monotone coupling field.

A cell is addressed by the integer coordinate ``z`` of its lower corner, so
cell ``z`` is the closed unit cube ``B_1(z)``.  Grids are stored as dense
boolean numpy arrays in row-major (C) order; array index ``i`` along axis
``j`` corresponds to lattice coordinate ``origin[j] + i``.

Randomness uses numpy's Philox4x64-10 counter-based generator keyed through
``numpy.random.SeedSequence``.  Both algorithms are fixed by numpy and
produce identical streams on every platform.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GeometryError, SizeError

SUPPORTED_DIMENSIONS = (2, 3, 4)
MAX_CELLS = 1 << 30


def _as_vector(values, name: str) -> tuple[int, ...]:
    out = tuple(int(v) for v in values)
    if len(out) not in SUPPORTED_DIMENSIONS:
        raise DomainError(
            f"{name} has dimension {len(out)}; supported dimensions are {SUPPORTED_DIMENSIONS}"
        )
    return out


def _check_dims(dims) -> tuple[int, ...]:
    dims = _as_vector(dims, "dims")
    if any(n < 1 for n in dims):
        raise SizeError(f"all extents must be >= 1, got {dims}")
    if math.prod(dims) > MAX_CELLS:
        raise SizeError(f"grid of extents {dims} exceeds {MAX_CELLS} cells")
    return dims


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return p


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive a 64-bit task seed from a master seed and task indices.

    The derivation hashes ``(master_seed, indices)`` with SeedSequence, so
    the result depends only on its arguments and never on scheduling.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in indices))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class Box:
    """The cells of ``B_side(corner)``: ``side`` cells along each axis."""

    corner: tuple[int, ...]
    side: int

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(c) for c in self.corner))
        if self.side < 1:
            raise GeometryError(f"box side must be >= 1, got {self.side}")

    @property
    def d(self) -> int:
        return len(self.corner)

    @property
    def cell_count(self) -> int:
        return self.side ** self.d

    @property
    def upper(self) -> tuple[int, ...]:
        """Exclusive upper cell coordinate per axis."""
        return tuple(c + self.side for c in self.corner)

    def contains(self, cell: Sequence[int]) -> bool:
        return all(c <= z < c + self.side for z, c in zip(cell, self.corner))

    def cells(self) -> Iterable[tuple[int, ...]]:
        ranges = [range(c, c + self.side) for c in self.corner]
        return itertools.product(*ranges)

    def shifted(self, offset: Sequence[int]) -> "Box":
        return Box(tuple(c + o for c, o in zip(self.corner, offset)), self.side)


@dataclass(frozen=True)
class WindowSpec:
    """The window ``W_L(center)`` of side ``L``."""

    center: tuple[int, ...]
    side: int

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        if self.side < 1:
            raise GeometryError(f"window side must be >= 1, got {self.side}")

    @classmethod
    def centered(cls, d: int, side: int) -> "WindowSpec":
        return cls((0,) * d, side)

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def corner(self) -> tuple[int, ...]:
        return tuple(c - self.side // 2 for c in self.center)

    @property
    def volume(self) -> int:
        return self.side ** self.d

    def bounds(self) -> tuple[tuple[int, int], ...]:
        """Closed real interval per axis: ``[c - floor(L/2), c + ceil(L/2)]``."""
        half_up = -(-self.side // 2)
        return tuple((c - self.side // 2, c + half_up) for c in self.center)


def window_interior_box(window: WindowSpec) -> Box:
    """The box of ``L^d`` cells whose closed union is the window."""
    return Box(window.corner, window.side)


def shell_cells(box: Box) -> set[tuple[int, ...]]:
    """Cells of the outermost layer ``S_l(x)`` of a box."""
    lo = box.corner
    hi = tuple(c + box.side - 1 for c in lo)
    return {
        z
        for z in box.cells()
        if any(zi == a or zi == b for zi, a, b in zip(z, lo, hi))
    }


def shell_mask(dims: Sequence[int]) -> np.ndarray:
    """Boolean mask of the outermost cell layer of an array of extents ``dims``."""
    mask = np.zeros(tuple(dims), dtype=bool)
    for axis in range(len(dims)):
        index = [slice(None)] * len(dims)
        index[axis] = 0
        mask[tuple(index)] = True
        index[axis] = -1
        mask[tuple(index)] = True
    return mask


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class CellGrid:
    """Black/white occupancy of a finite box of cells.

    Attributes:
        occupancy: Boolean array, ``True`` for black cells. Read-only.
        origin: Lattice coordinate of array index ``(0, ..., 0)``.
        p: Coloring probability the grid was drawn with, if any.
        seed: Seed the grid was drawn with, if any.
    """

    occupancy: np.ndarray
    origin: tuple[int, ...] = None
    p: float | None = None
    seed: int | None = None

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        dims = _check_dims(occ.shape)
        origin = (0,) * len(dims) if self.origin is None else tuple(int(o) for o in self.origin)
        if len(origin) != len(dims):
            raise GeometryError(f"origin {origin} does not match grid dimension {len(dims)}")
        object.__setattr__(self, "occupancy", _freeze(occ.copy() if occ is self.occupancy else occ))
        object.__setattr__(self, "origin", origin)

    @classmethod
    def from_cells(cls, dims, cells: Iterable[Sequence[int]], origin=None, **kw) -> "CellGrid":
        """Build a grid from lattice coordinates of its black cells."""
        dims = _check_dims(dims)
        origin = (0,) * len(dims) if origin is None else tuple(origin)
        occ = np.zeros(dims, dtype=bool)
        for z in cells:
            idx = tuple(int(zi) - o for zi, o in zip(z, origin))
            if any(i < 0 or i >= n for i, n in zip(idx, dims)):
                raise GeometryError(f"cell {tuple(z)} lies outside the grid")
            occ[idx] = True
        return cls(occ, origin, **kw)

    @classmethod
    def for_window(cls, window: WindowSpec, occupancy, **kw) -> "CellGrid":
        return cls(occupancy, window.corner, **kw)

    @property
    def d(self) -> int:
        return self.occupancy.ndim

    @property
    def dims(self) -> tuple[int, ...]:
        return self.occupancy.shape

    @property
    def cell_count(self) -> int:
        return self.occupancy.size

    @property
    def black_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def black_cells(self) -> set[tuple[int, ...]]:
        return {
            tuple(int(i) + o for i, o in zip(idx, self.origin))
            for idx in np.argwhere(self.occupancy)
        }

    def covers(self, box: Box) -> bool:
        """True when the grid region is exactly the cells of ``box``."""
        return self.origin == box.corner and all(n == box.side for n in self.dims)

    def restrict(self, box: Box) -> "CellGrid":
        """The coloring on ``box``; cells outside this grid count as white."""
        if box.d != self.d:
            raise GeometryError("box and grid dimensions differ")
        out = np.zeros((box.side,) * self.d, dtype=bool)
        src, dst = [], []
        for c, o, n in zip(box.corner, self.origin, self.dims):
            lo = max(c, o)
            hi = min(c + box.side, o + n)
            if hi <= lo:
                return CellGrid(out, box.corner, self.p, self.seed)
            src.append(slice(lo - o, hi - o))
            dst.append(slice(lo - c, hi - c))
        out[tuple(dst)] = self.occupancy[tuple(src)]
        return CellGrid(out, box.corner, self.p, self.seed)

    def __eq__(self, other):
        if not isinstance(other, CellGrid):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.dims == other.dims
            and bool(np.array_equal(self.occupancy, other.occupancy))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CouplingField:
    """I.i.d. uniform values, one per cell; sublevel sets couple all ``p``."""

    values: np.ndarray
    origin: tuple[int, ...] = None
    seed: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        dims = _check_dims(vals.shape)
        if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
            raise DomainError("coupling field values must lie in [0, 1]")
        origin = (0,) * len(dims) if self.origin is None else tuple(int(o) for o in self.origin)
        object.__setattr__(self, "values", _freeze(vals))
        object.__setattr__(self, "origin", origin)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def dims(self) -> tuple[int, ...]:
        return self.values.shape


def _uniform_open_closed(rng: np.random.Generator, dims) -> np.ndarray:
    # (0, 1]: threshold at p=0 is then empty and at p=1 full.
    return 1.0 - rng.random(dims)


def sample_coupling_field(dims, origin=None, seed: int | None = None) -> CouplingField:
    """Draw i.i.d. uniform values on ``(0, 1]``, deterministic given ``seed``."""
    dims = _check_dims(dims)
    return CouplingField(_uniform_open_closed(make_rng(seed), dims), origin, seed)


def threshold(field: CouplingField, p: float) -> CellGrid:
    """Closed sublevel set: a cell is black iff its value is ``<= p``."""
    p = _check_probability(p)
    return CellGrid(field.values <= p, field.origin, p, field.seed)


def sample_coloring(dims, origin=None, p: float = 0.5, seed: int | None = None) -> CellGrid:
    """Color every cell black independently with probability ``p``.

    Equal, bit for bit, to ``threshold(sample_coupling_field(dims, origin, seed), p)``.
    """
    p = _check_probability(p)
    dims = _check_dims(dims)
    values = _uniform_open_closed(make_rng(seed), dims)
    return CellGrid(values <= p, origin, p, seed)


def sample_window(window: WindowSpec, p: float, seed: int | None = None) -> CellGrid:
    return sample_coloring((window.side,) * window.d, window.corner, p, seed)
