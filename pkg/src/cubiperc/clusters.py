"""Cluster labeling and the homotopy-type counting functions N and N*.

Clusters are face-connected sets of black cells (``2d`` neighbours), which are
the connected components of the open set ``Phi``.  Each cluster is typed by
the Betti numbers of either its open complex or the union of its closed cubes
(the hybrid convention: corner contact is ignored when separating clusters but
counted when computing the homology of one cluster).

For ``d = 2`` the per-cluster Euler characteristic is computed for all
clusters at once with array operations, and ``b_1 = 1 - chi``.  In higher
dimensions every cluster is reduced separately; clusters of identical shape
share one cached result.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

import numpy as np
from scipy import ndimage

from .complex import MODES, axis_subsets, build_complex
from .errors import CapabilityError, DomainError, GeometryError
from .homology import BettiVector, betti_numbers
from .lattice import Box, CellGrid, WindowSpec, shell_mask, window_interior_box

HomotopyKey = Union[int, tuple[int, ...]]


def homotopy_key(betti, d: int) -> HomotopyKey:
    """``b_1`` in the plane (wedge of ``b_1`` circles); ``(b_1..b_{d-1})`` otherwise."""
    if d == 2:
        return int(betti[1])
    return tuple(int(b) for b in betti[1:d])


def key_betti(key: HomotopyKey, k: int) -> int:
    """The k-th Betti number encoded in a homotopy key."""
    if isinstance(key, tuple):
        return key[k - 1]
    if k != 1:
        raise DomainError(f"planar keys only carry b_1, asked for b_{k}")
    return key


def format_key(key: HomotopyKey) -> str:
    if isinstance(key, tuple):
        return ":".join(map(str, key))
    return str(key)


def parse_key(text: str) -> HomotopyKey:
    if ":" in text:
        return tuple(int(x) for x in text.split(":"))
    return int(text)


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """Face-connectivity labels: 0 for white cells, ``1..count`` for clusters.

    Labels follow the first cell of each cluster in a row-major scan.
    """

    labels: np.ndarray
    count: int
    origin: tuple[int, ...]

    def cells(self, label: int) -> list[tuple[int, ...]]:
        return [
            tuple(int(i) + o for i, o in zip(idx, self.origin))
            for idx in np.argwhere(self.labels == label)
        ]

    def components(self) -> list[list[tuple[int, ...]]]:
        return [self.cells(c) for c in range(1, self.count + 1)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.count + 1)[1:]


def label_components(grid: CellGrid) -> ComponentLabeling:
    structure = ndimage.generate_binary_structure(grid.d, 1)
    labels, count = ndimage.label(grid.occupancy, structure=structure)
    return ComponentLabeling(labels, int(count), grid.origin)


def _shift(padded: np.ndarray, shift, shape) -> np.ndarray:
    return padded[tuple(slice(s, s + n) for s, n in zip(shift, shape))]


def component_euler(labels: np.ndarray, count: int, mode: str) -> np.ndarray:
    """Euler characteristic of every cluster's complex, indexed ``0..count-1``."""
    d = labels.ndim
    chi = np.zeros(count + 1, dtype=np.int64)
    if mode == "open":
        padded = np.pad(labels, [(0, 1)] * d)
        for k in range(d + 1):
            for axes in axis_subsets(d, k):
                mask = labels > 0
                for bits in itertools.product((0, 1), repeat=k):
                    shift = [0] * d
                    for a, b in zip(axes, bits):
                        shift[a] = b
                    mask &= _shift(padded, shift, labels.shape) > 0
                chi += (-1) ** k * np.bincount(labels[mask], minlength=count + 1)
    elif mode == "closed":
        padded = np.pad(labels, [(1, 1)] * d)
        for k in range(d + 1):
            for axes in axis_subsets(d, k):
                free = [a for a in range(d) if a not in axes]
                shape = tuple(n if a in axes else n + 1 for a, n in enumerate(labels.shape))
                stack = []
                for bits in itertools.product((0, 1), repeat=len(free)):
                    shift = [1] * d
                    for a, b in zip(free, bits):
                        shift[a] = 1 - b
                    stack.append(_shift(padded, shift, shape).ravel())
                # One row per lattice face; a face belongs to every distinct
                # cluster among the cells that contain it.
                rows = np.sort(np.stack(stack, axis=1), axis=1)
                keep = rows > 0
                keep[:, 1:] &= rows[:, 1:] != rows[:, :-1]
                chi += (-1) ** k * np.bincount(rows[keep], minlength=count + 1)
    else:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    return chi[1:]


@lru_cache(maxsize=65536)
def _shape_betti(mode: str, shape: tuple[int, ...], packed: bytes) -> BettiVector:
    n = int(np.prod(shape))
    bits = np.unpackbits(np.frombuffer(packed, dtype=np.uint8), count=n).astype(bool)
    return betti_numbers(build_complex(CellGrid(bits.reshape(shape)), mode))


def shape_betti(mask: np.ndarray, mode: str) -> BettiVector:
    """Betti numbers of one cluster given as a boolean mask (memoized by shape)."""
    return _shape_betti(mode, mask.shape, np.packbits(mask.ravel()).tobytes())


@dataclass(frozen=True, eq=False)
class ComponentTable:
    """Per-cluster arrays for one grid, row ``i`` describing label ``i + 1``."""

    labeling: ComponentLabeling
    mode: str
    sizes: np.ndarray
    touches: np.ndarray
    betti: np.ndarray
    slices: list

    @property
    def count(self) -> int:
        return self.labeling.count

    @property
    def d(self) -> int:
        return self.labeling.labels.ndim

    def keys(self) -> list[HomotopyKey]:
        if self.d == 2:
            return [int(b) for b in self.betti[:, 1]]
        return [tuple(int(x) for x in row[1 : self.d]) for row in self.betti]

    def key_counts(self, include_boundary: bool = False) -> dict[HomotopyKey, int]:
        """Number of clusters per key; boundary-touching clusters only if asked."""
        out: dict[HomotopyKey, int] = {}
        if self.d == 2:
            b1 = self.betti[:, 1] if include_boundary else self.betti[~self.touches, 1]
            for k, c in enumerate(np.bincount(b1)):
                if c:
                    out[k] = int(c)
            return out
        for key, touch in zip(self.keys(), self.touches):
            if include_boundary or not touch:
                out[key] = out.get(key, 0) + 1
        return out


def component_table(
    grid: CellGrid, mode: str = "open", labeling: ComponentLabeling | None = None
) -> ComponentTable:
    """Size, boundary contact and Betti vector of every cluster in ``grid``.

    Boundary contact means a cell in the outermost layer of the grid.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    d = grid.d
    if mode == "closed" and d > 3:
        raise CapabilityError("closed-mode homology is supported for d <= 3 only")
    lab = labeling or label_components(grid)
    labels, n = lab.labels, lab.count
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    touches = np.zeros(n + 1, dtype=bool)
    touches[labels[shell_mask(labels.shape)]] = True
    touches = touches[1:]
    slices = ndimage.find_objects(labels, max_label=n) if n else []
    betti = np.zeros((n, d + 1), dtype=np.int64)
    if n:
        betti[:, 0] = 1
        if d == 2:
            betti[:, 1] = 1 - component_euler(labels, n, mode)
        else:
            for i, sl in enumerate(slices):
                betti[i] = shape_betti(labels[sl] == i + 1, mode)
    return ComponentTable(lab, mode, sizes, touches, betti, slices)


@dataclass(frozen=True)
class ComponentSummary:
    label: int
    size: int
    bbox: tuple[tuple[int, ...], tuple[int, ...]]
    touches_window_boundary: bool
    betti: BettiVector
    type_key: HomotopyKey

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "size": self.size,
            "bbox": [list(self.bbox[0]), list(self.bbox[1])],
            "touches_window_boundary": self.touches_window_boundary,
            "betti": list(self.betti),
            "key": format_key(self.type_key),
        }


def check_window(grid: CellGrid, window: WindowSpec | Box | None) -> None:
    if window is None:
        return
    box = window_interior_box(window) if isinstance(window, WindowSpec) else window
    if not grid.covers(box):
        raise GeometryError(
            f"grid (origin {grid.origin}, dims {grid.dims}) does not cover "
            f"box (corner {box.corner}, side {box.side}) exactly"
        )


def summaries_from_table(table: ComponentTable) -> list[ComponentSummary]:
    origin = table.labeling.origin
    keys = table.keys()
    out = []
    for i in range(table.count):
        sl = table.slices[i]
        lo = tuple(s.start + o for s, o in zip(sl, origin))
        hi = tuple(s.stop - 1 + o for s, o in zip(sl, origin))
        out.append(
            ComponentSummary(
                label=i + 1,
                size=int(table.sizes[i]),
                bbox=(lo, hi),
                touches_window_boundary=bool(table.touches[i]),
                betti=BettiVector(table.betti[i]),
                type_key=keys[i],
            )
        )
    return out


def summarize_components(
    grid: CellGrid, window: WindowSpec | Box | None = None, mode: str = "open"
) -> list[ComponentSummary]:
    """One summary per cluster of a grid that covers the window's cells exactly."""
    check_window(grid, window)
    return summaries_from_table(component_table(grid, mode))


def count_N(summaries: Iterable[ComponentSummary], key: HomotopyKey | None = None) -> int:
    """Clusters of type ``key`` that avoid the window's outer cell layer."""
    return sum(
        1
        for s in summaries
        if not s.touches_window_boundary and (key is None or s.type_key == key)
    )


def count_Nstar(summaries: Iterable[ComponentSummary], key: HomotopyKey | None = None) -> int:
    """Clusters of type ``key`` meeting the window.

    Boundary-touching clusters are typed by their part inside the window,
    which need not be the type of the full cluster.
    """
    return sum(1 for s in summaries if key is None or s.type_key == key)


def components_to_json(summaries: Iterable[ComponentSummary]) -> str:
    return json.dumps([s.to_json() for s in summaries], indent=1)
