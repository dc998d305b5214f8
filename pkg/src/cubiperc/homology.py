"""Betti numbers of cubical complexes over GF(2).

Boundary columns are Python integers used as bit sets over the faces of the
next lower dimension, so adding two columns is a single XOR.  Columns are
reduced left to right with the lowest-pivot rule; only ranks are kept.
"""

from __future__ import annotations

from math import comb

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .complex import CubicalComplex, euler_characteristic
from .errors import ConsistencyError, DomainError


class BettiVector(tuple):
    """Betti numbers ``(b_0, ..., b_d)``."""

    def __new__(cls, values):
        return super().__new__(cls, (int(v) for v in values))

    @property
    def euler(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self))

    def __repr__(self):
        return f"BettiVector({tuple(self)})"


def boundary_columns(cx: CubicalComplex, k: int) -> list[int]:
    """Columns of the boundary map from k-faces to (k-1)-faces as bit sets."""
    lower = cx.index(k - 1)
    cols = []
    for f in cx.faces[k]:
        col = 0
        for g in f.boundary():
            col ^= 1 << lower[g]
        cols.append(col)
    return cols


def gf2_rank(columns) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                rank += 1
                break
            col ^= other
    return rank


def boundary_ranks(cx: CubicalComplex) -> list[int]:
    """``rank d_k`` for ``k = 0 .. d + 1`` (the two ends are zero)."""
    ranks = [0] * (cx.d + 2)
    for k in range(1, cx.d + 1):
        if cx.faces[k]:
            ranks[k] = gf2_rank(boundary_columns(cx, k))
    return ranks


def betti_numbers(cx: CubicalComplex) -> BettiVector:
    ranks = boundary_ranks(cx)
    counts = cx.face_counts()
    betti = BettiVector(counts[k] - ranks[k] - ranks[k + 1] for k in range(cx.d + 1))
    if betti.euler != euler_characteristic(cx):
        raise ConsistencyError("Betti numbers disagree with the Euler characteristic")
    return betti


def is_connected(cx: CubicalComplex) -> bool:
    n = len(cx.faces[0])
    if n == 0:
        return False
    vindex = cx.index(0)
    rows, cols = [], []
    for e in cx.faces[1]:
        a, b = e.boundary()
        rows.append(vindex[a])
        cols.append(vindex[b])
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(graph, directed=False)
    return ncomp == 1


def betti1_planar(cx: CubicalComplex) -> int:
    """``b_1 = 1 - chi`` for a connected planar complex (where ``b_2 = 0``)."""
    if cx.d != 2:
        raise DomainError(f"planar shortcut needs d=2, got d={cx.d}")
    if not is_connected(cx):
        raise DomainError("planar shortcut needs a connected complex")
    return 1 - euler_characteristic(cx)


def betti_bound_check(component, k: int, d: int) -> bool:
    """Check ``b_k <= 2^k C(d, k) |C|`` for one component summary.

    Raises:
        ConsistencyError: if the bound is violated, which means the homology
            computation is wrong.
    """
    bound = 2**k * comb(d, k) * component.size
    if component.betti[k] > bound:
        raise ConsistencyError(
            f"b_{k}={component.betti[k]} exceeds 2^k C(d,k) |C| = {bound} "
            f"for component {component.label}"
        )
    return True
