"""Deterministic egg and egg-sac cluster fixtures.

An egg is a ``7^d`` patch: a black outer shell, an embryonic k-cycle in the
central ``3^d`` box, and one black cell in the intermediate shell joining the
two.  An egg sac of side ``L`` has a white outer layer, a black inner wall,
and eggs inside joined to the wall by straight umbilical paths.

Layout used here (offsets relative to the sac corner):

* egg corners sit at ``3 + 10 j`` on every axis, leaving a white gap of at
  least one cell to the wall and three cells between eggs;
* an umbilical path leaves its egg on the last axis at offset +7, steps to
  offset +8 (the middle of the gap) and runs down axis 0 to the wall.  The
  path is two cells away from every other egg, so corridors never touch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .clusters import label_components, shape_betti
from .errors import CapabilityError, CapacityError
from .homology import BettiVector
from .lattice import CellGrid, shell_mask

EGG_SIDE = 7
EGG_PITCH = 10
EGG_OFFSET = 3


def _check_dk(d: int, k: int) -> None:
    if d not in (2, 3, 4) or not 1 <= k <= d - 1:
        raise CapabilityError(f"eggs are supported for d in 2..4 and 1 <= k <= d-1, got d={d}, k={k}")


def embryo_mask(d: int, k: int) -> np.ndarray:
    """``3^d`` mask of a k-cycle: a hollow ``3^(k+1)`` shell in axes ``0..k``,
    one cell thick (the middle layer) in the remaining axes."""
    m = np.zeros((3,) * d, dtype=bool)
    for idx in itertools.product(range(3), repeat=d):
        ring, rest = idx[: k + 1], idx[k + 1 :]
        if all(r == 1 for r in rest) and any(r != 1 for r in ring):
            m[idx] = True
    return m


def egg_occupancy(d: int, k: int) -> np.ndarray:
    occ = shell_mask((EGG_SIDE,) * d)
    occ[(slice(2, 5),) * d] = embryo_mask(d, k)
    # The attachment cell: the embryo cell (2, 3, .., 3) meets the outer shell
    # through (1, 3, .., 3), the only black cell of the intermediate shell.
    occ[(1,) + (3,) * (d - 1)] = True
    return occ


@dataclass(frozen=True)
class EggPatch:
    d: int
    k: int
    grid: CellGrid

    @property
    def anchor(self) -> tuple[int, ...]:
        return self.grid.origin


def make_egg(d: int, k: int, anchor=None) -> EggPatch:
    _check_dk(d, k)
    anchor = (0,) * d if anchor is None else tuple(anchor)
    return EggPatch(d, k, CellGrid(egg_occupancy(d, k), anchor))


@dataclass(frozen=True)
class EggReport:
    connected: bool
    shell_black: bool
    single_cycle: bool
    one_attachment: bool
    core_betti: BettiVector

    @property
    def ok(self) -> bool:
        return self.connected and self.shell_black and self.single_cycle and self.one_attachment

    def __bool__(self):
        return self.ok


def verify_egg(patch: EggPatch | CellGrid, k: int | None = None) -> EggReport:
    """Check the four egg conditions mechanically on a ``7^d`` patch."""
    grid = patch.grid if isinstance(patch, EggPatch) else patch
    if k is None:
        k = patch.k
    occ = grid.occupancy
    d = grid.d
    if occ.shape != (EGG_SIDE,) * d:
        raise CapabilityError(f"an egg patch is 7^d cells, got {occ.shape}")
    connected = label_components(grid).count == 1
    shell_black = bool(occ[shell_mask(occ.shape)].all())
    core = occ[(slice(2, 5),) * d]
    betti = shape_betti(core, "open")
    single = betti[k] == 1 and all(betti[j] == 0 for j in range(1, d + 1) if j != k)
    inner = occ[(slice(1, 6),) * d][shell_mask((5,) * d)]
    return EggReport(connected, shell_black, bool(single), int(inner.sum()) == 1, betti)


def eggs_per_axis(L: int) -> int:
    # Egg corners at 3 + 10 j must satisfy corner + 6 <= L - 4.
    return max(0, (L - 13) // EGG_PITCH + 1)


def sac_capacity(L: int, d: int) -> int:
    return eggs_per_axis(L) ** d


def min_sac_side(d: int, m: int) -> int:
    """Smallest ``L`` whose sac holds ``m`` eggs."""
    per_axis = 0
    while per_axis**d < m:
        per_axis += 1
    if per_axis == 0:
        return 5
    return 13 + EGG_PITCH * (per_axis - 1)


@dataclass(frozen=True)
class EggSacSpec:
    L: int
    d: int
    k: int
    egg_anchors: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.egg_anchors)

    @property
    def rho(self) -> float:
        """Abundance rate: eggs per cell of the box."""
        return self.m / self.L**self.d


def make_egg_sac(L: int, d: int, k: int, m: int, origin=None) -> tuple[CellGrid, EggSacSpec]:
    """A ``L^d`` grid holding one egg-sac cluster with ``m`` eggs.

    Raises:
        CapacityError: if ``m`` eggs do not fit; ``max_feasible`` holds the
            largest number that does.
    """
    _check_dk(d, k)
    if L < 5:
        raise CapacityError(f"a sac needs L >= 5 for its double wall, got L={L}", 0)
    cap = sac_capacity(L, d)
    if m < 0 or m > cap:
        raise CapacityError(f"{m} eggs do not fit in a sac of side {L} (d={d}); max is {cap}", cap)
    occ = np.zeros((L,) * d, dtype=bool)
    occ[(slice(1, L - 1),) * d] = shell_mask((L - 2,) * d)
    egg = egg_occupancy(d, k)
    per_axis = eggs_per_axis(L)
    corners = list(itertools.product(range(per_axis), repeat=d))[:m]
    anchors = []
    for j in corners:
        c = tuple(EGG_OFFSET + EGG_PITCH * ji for ji in j)
        occ[tuple(slice(ci, ci + EGG_SIDE) for ci in c)] = egg
        last = c[-1]
        rest = c[1:-1]
        occ[(c[0],) + rest + (last + 7,)] = True
        for x0 in range(1, c[0] + 1):
            occ[(x0,) + rest + (min(last + 8, L - 2),)] = True
        anchors.append(c)
    origin = (0,) * d if origin is None else tuple(origin)
    shifted = tuple(tuple(a + o for a, o in zip(c, origin)) for c in anchors)
    return CellGrid(occ, origin), EggSacSpec(L, d, k, shifted)


def sac_component_betti(grid: CellGrid, mode: str = "open") -> BettiVector:
    """Betti numbers of the largest cluster in a sac grid."""
    lab = label_components(grid)
    if lab.count == 0:
        return BettiVector([0] * (grid.d + 1))
    sizes = lab.sizes()
    big = int(np.argmax(sizes)) + 1
    return shape_betti(lab.labels == big, mode)
