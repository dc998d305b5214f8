"""Self-test battery behind ``cubiperc check``.

Every check returns ``(name, ok, detail)``; randomized checks draw their
samples from ``derive_seed(seed, ...)`` so a failure can be replayed.
"""

from __future__ import annotations

import random

import numpy as np

from . import reference
from .clusters import component_table, summaries_from_table
from .complex import build_complex, euler_characteristic
from .errors import ConsistencyError
from .generators import make_egg, make_egg_sac, min_sac_side, sac_component_betti, verify_egg
from .homology import betti_bound_check, betti_numbers
from .lattice import CellGrid, WindowSpec, derive_seed, sample_coupling_field, sample_window
from .measures import lipschitz_check, sandwich_check

EGG_CASES = ((2, 1), (3, 1), (3, 2))
SAC_EGGS = (1, 2, 4, 8)


def all_colorings(side: int = 3, d: int = 2):
    n = side**d
    for code in range(1 << n):
        yield code, np.array([(code >> i) & 1 for i in range(n)], dtype=bool).reshape((side,) * d)


def check_exhaustive_oracle() -> tuple[bool, str]:
    """Per-cluster types and exact expectations on all 512 colorings of 3x3."""
    bad = []
    for mode in ("open", "closed"):
        exp = {"N": [0.0, 0.0], "Nstar": [0.0, 0.0]}
        for code, occ in all_colorings():
            table = component_table(CellGrid(occ), mode)
            fast = [(tuple(int(x) for x in row), bool(t)) for row, t in zip(table.betti, table.touches)]
            slow = reference.brute_force_types(occ, mode)
            if fast != slow:
                bad.append(f"{mode} coloring {code}")
                continue
            w = 0.5**9
            for (betti, touch) in fast:
                if betti[1] <= 1:
                    exp["Nstar"][betti[1]] += w
                    if not touch:
                        exp["N"][betti[1]] += w
        ref = reference.exhaustive_expectations(3, 2, 0.5, mode, max_key=1)
        for rule in ("N", "Nstar"):
            if not np.allclose(exp[rule], ref[rule], rtol=0, atol=1e-15):
                bad.append(f"{mode} {rule} expectation")
    return not bad, "512 colorings x 2 modes agree" if not bad else "; ".join(bad[:5])


def check_reduction_oracle() -> tuple[bool, str]:
    """Sparse reduction vs dense elimination on all 3x3 colorings, whole grid."""
    bad = []
    for mode in ("open", "closed"):
        for code, occ in all_colorings():
            cx = build_complex(CellGrid(occ), mode)
            betti = betti_numbers(cx)
            cells = {tuple(int(i) for i in z) for z in np.argwhere(occ)}
            faces = (
                reference.inductive_open_faces(cells, 2)
                if mode == "open"
                else reference.closed_faces(cells, 2)
            )
            if tuple(betti) != reference.dense_betti(faces):
                bad.append(f"{mode} coloring {code}")
            elif betti.euler != euler_characteristic(cx):
                bad.append(f"{mode} coloring {code} (Euler)")
    return not bad, "1024 complexes agree" if not bad else "; ".join(bad[:5])


def annulus_grid() -> CellGrid:
    occ = np.ones((3, 3), dtype=bool)
    occ[1, 1] = False
    return CellGrid(occ)


def hollow_cube_grid() -> CellGrid:
    occ = np.ones((3, 3, 3), dtype=bool)
    occ[1, 1, 1] = False
    return CellGrid(occ)


def check_homology_fixtures() -> tuple[bool, str]:
    got = {}
    for mode in ("open", "closed"):
        got[f"annulus/{mode}"] = tuple(betti_numbers(build_complex(annulus_grid(), mode)))
        got[f"shell/{mode}"] = tuple(betti_numbers(build_complex(hollow_cube_grid(), mode)))
    want = {k: (1, 1, 0) if k.startswith("annulus") else (1, 0, 1, 0) for k in got}
    ok = got == want
    return ok, ", ".join(f"{k}={v}" for k, v in got.items())


def check_eggs() -> tuple[bool, str]:
    reports = {dk: verify_egg(make_egg(*dk)) for dk in EGG_CASES}
    ok = all(r.ok for r in reports.values())
    return ok, ", ".join(f"(d={d},k={k}) {'ok' if r.ok else r}" for (d, k), r in reports.items())


def check_sacs() -> tuple[bool, str]:
    parts, ok = [], True
    for m in SAC_EGGS:
        L = min_sac_side(2, m)
        grid, _ = make_egg_sac(L, 2, 1, m)
        b1 = sac_component_betti(grid, "open")[1]
        ok &= b1 >= m
        parts.append(f"m={m} L={L} b1={b1}")
    return bool(ok), ", ".join(parts)


def check_sandwich(seed: int, samples: int, L: int = 60, ell: int = 10) -> tuple[bool, str]:
    window = WindowSpec.centered(2, L)
    fails = 0
    total = 0
    for p in (0.3, 0.6):
        for i in range(samples):
            grid = sample_window(window, p, derive_seed(seed, 1, int(p * 100), i))
            for key in (0, 1, 2):
                total += 1
                fails += not sandwich_check(grid, window, ell, key, "closed").holds
    return fails == 0, f"{total - fails}/{total} (sample, key) pairs hold"


def check_lipschitz(seed: int, samples: int, L: int = 100) -> tuple[bool, str]:
    window = WindowSpec.centered(2, L)
    rng = random.Random(seed)
    fails = 0
    for i in range(samples):
        field = sample_coupling_field((L, L), window.corner, derive_seed(seed, 2, i))
        p1, p2 = sorted(rng.random() for _ in range(2))
        fails += not lipschitz_check(field, window, p1, p2, None, "closed").holds
    return fails == 0, f"{samples - fails}/{samples} coupled pairs hold"


def check_betti_bound(seed: int, samples: int) -> tuple[bool, str]:
    checked = 0
    try:
        for i in range(samples):
            d = 2 if i % 2 == 0 else 3
            L = 40 if d == 2 else 12
            grid = sample_window(WindowSpec.centered(d, L), 0.55, derive_seed(seed, 3, i))
            for s in summaries_from_table(component_table(grid, "closed")):
                for k in range(d + 1):
                    betti_bound_check(s, k, d)
                    checked += 1
    except ConsistencyError as exc:
        return False, str(exc)
    return True, f"{checked} (component, k) bounds hold"


def run_battery(seed: int = 0, samples: int = 20) -> list[tuple[str, bool, str]]:
    checks = [
        ("exhaustive 3x3 oracle", check_exhaustive_oracle),
        ("reduction vs dense elimination", check_reduction_oracle),
        ("homology fixtures", check_homology_fixtures),
        ("egg verification", check_eggs),
        ("egg-sac witnesses", check_sacs),
        ("sandwich inequality", lambda: check_sandwich(seed, samples)),
        ("coupled Lipschitz bound", lambda: check_lipschitz(seed, samples)),
        ("Betti bound", lambda: check_betti_bound(seed, samples)),
    ]
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
