"""Slow, literal reference implementations used as independent oracles.

Nothing here shares code with the production paths it is compared against:
labeling is a plain breadth-first flood fill, the open complex is built by
the literal inductive rule, and ranks come from dense Gaussian elimination.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np


def bfs_labels(occ: np.ndarray) -> tuple[np.ndarray, int]:
    """Face-connectivity labels numbered by first visit in a row-major scan."""
    occ = np.asarray(occ, dtype=bool)
    labels = np.zeros(occ.shape, dtype=np.int64)
    d = occ.ndim
    steps = []
    for a in range(d):
        for s in (-1, 1):
            e = [0] * d
            e[a] = s
            steps.append(tuple(e))
    n = 0
    for start in itertools.product(*(range(k) for k in occ.shape)):
        if not occ[start] or labels[start]:
            continue
        n += 1
        labels[start] = n
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for e in steps:
                nb = tuple(c + s for c, s in zip(cur, e))
                if all(0 <= x < k for x, k in zip(nb, occ.shape)) and occ[nb] and not labels[nb]:
                    labels[nb] = n
                    queue.append(nb)
    return labels, n


def inductive_open_faces(cells: set, d: int) -> list[set]:
    """Open-mode faces by the inductive rule: a k-cube is added when all of
    its (k-1)-faces are present.  Faces are (anchor, axes) tuples."""
    faces = [set((tuple(c), ()) for c in cells)]
    for k in range(1, d + 1):
        fk = set()
        for anchor, axes in faces[k - 1]:
            for a in range(d):
                if a in axes:
                    continue
                new_axes = tuple(sorted(axes + (a,)))
                cand = (anchor, new_axes)
                subfaces = []
                for b in new_axes:
                    rest = tuple(x for x in new_axes if x != b)
                    shifted = list(anchor)
                    shifted[b] += 1
                    subfaces.append((anchor, rest))
                    subfaces.append((tuple(shifted), rest))
                if all(f in faces[k - 1] for f in subfaces):
                    fk.add(cand)
        faces.append(fk)
    return faces


def closed_faces(cells: set, d: int) -> list[set]:
    """All faces of the closed unit cubes on ``cells``, deduplicated."""
    faces = [set() for _ in range(d + 1)]
    for z in cells:
        for axes_mask in itertools.product((0, 1), repeat=d):
            axes = tuple(i for i in range(d) if axes_mask[i])
            free = [i for i in range(d) if not axes_mask[i]]
            for bits in itertools.product((0, 1), repeat=len(free)):
                anchor = list(z)
                for i, b in zip(free, bits):
                    anchor[i] += b
                faces[len(axes)].add((tuple(anchor), axes))
    return faces


def dense_gf2_rank(matrix: np.ndarray) -> int:
    m = (np.asarray(matrix, dtype=np.uint8) % 2).copy()
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def dense_betti(faces: list[set]) -> tuple[int, ...]:
    """Betti numbers from dense boundary matrices over GF(2)."""
    d = len(faces) - 1
    order = [sorted(f) for f in faces]
    index = [{f: i for i, f in enumerate(fs)} for fs in order]
    ranks = [0] * (d + 2)
    for k in range(1, d + 1):
        if not order[k] or not order[k - 1]:
            continue
        mat = np.zeros((len(order[k - 1]), len(order[k])), dtype=np.uint8)
        for j, (anchor, axes) in enumerate(order[k]):
            for b in axes:
                rest = tuple(x for x in axes if x != b)
                shifted = list(anchor)
                shifted[b] += 1
                mat[index[k - 1][(anchor, rest)], j] ^= 1
                mat[index[k - 1][(tuple(shifted), rest)], j] ^= 1
        ranks[k] = dense_gf2_rank(mat)
    return tuple(len(order[k]) - ranks[k] - ranks[k + 1] for k in range(d + 1))


def brute_force_types(occ: np.ndarray, mode: str) -> list[tuple[tuple[int, ...], bool]]:
    """``(betti, touches_boundary)`` for every cluster, via the slow oracles."""
    labels, n = bfs_labels(occ)
    d = labels.ndim
    out = []
    for c in range(1, n + 1):
        cells = {tuple(int(x) for x in idx) for idx in np.argwhere(labels == c)}
        touches = any(
            any(x == 0 or x == k - 1 for x, k in zip(z, occ.shape)) for z in cells
        )
        faces = inductive_open_faces(cells, d) if mode == "open" else closed_faces(cells, d)
        out.append((dense_betti(faces), touches))
    return out


def exhaustive_expectations(side: int, d: int, p: float, mode: str, max_key: int = 2) -> dict:
    """Exact ``E[N(key)]`` and ``E[N*(key)]`` over all colorings of a ``side^d`` window.

    Keys are ``b_1`` (planar windows only).
    """
    if d != 2:
        raise ValueError("exhaustive expectations are keyed by b_1 and need d = 2")
    ncell = side**d
    exp_n = [0.0] * (max_key + 1)
    exp_star = [0.0] * (max_key + 1)
    for code in range(1 << ncell):
        bits = np.array([(code >> i) & 1 for i in range(ncell)], dtype=bool).reshape((side,) * d)
        k_black = int(bits.sum())
        weight = p**k_black * (1 - p) ** (ncell - k_black)
        for betti, touches in brute_force_types(bits, mode):
            key = betti[1]
            if key <= max_key:
                exp_star[key] += weight
                if not touches:
                    exp_n[key] += weight
    return {"N": exp_n, "Nstar": exp_star}
