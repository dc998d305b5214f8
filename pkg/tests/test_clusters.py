import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubiperc import CellGrid, WindowSpec, count_N, count_Nstar, label_components, summarize_components
from cubiperc.clusters import (
    component_euler,
    component_table,
    components_to_json,
    format_key,
    homotopy_key,
    key_betti,
    parse_key,
)
from cubiperc.errors import CapabilityError, DomainError, GeometryError
from cubiperc.lattice import sample_coloring, sample_window
from cubiperc.reference import brute_force_types, bfs_labels

from conftest import grid_from_rows

# A ring whose loop only closes through a corner contact.
CORNER_RING = [".##", "#.#", "###"]


def test_white_grid_has_no_components():
    assert label_components(CellGrid(np.zeros((5, 5), bool))).count == 0


def test_diagonal_cells_are_separate():
    lab = label_components(grid_from_rows(["#.", ".#"]))
    assert lab.count == 2


def test_checkerboard():
    occ = (np.indices((4, 4)).sum(axis=0) % 2).astype(bool)
    lab = label_components(CellGrid(occ))
    assert lab.count == 8 and set(lab.sizes()) == {1}


@pytest.mark.parametrize("d,side", [(2, 30), (3, 10), (4, 5)])
def test_labels_match_bfs(d, side):
    g = sample_coloring((side,) * d, p=0.55, seed=d)
    lab = label_components(g)
    ref, n = bfs_labels(g.occupancy)
    assert lab.count == n
    assert np.array_equal(lab.labels, ref)


def test_single_interior_cell():
    g = grid_from_rows(["...", ".#.", "..."])
    (s,) = summarize_components(g)
    assert s.betti == (1, 0, 0) and s.type_key == 0 and not s.touches_window_boundary


@pytest.mark.parametrize("mode", ["open", "closed"])
def test_annulus_key(mode):
    g = grid_from_rows([".....", ".###.", ".#.#.", ".###.", "....."])
    (s,) = summarize_components(g, mode=mode)
    assert s.type_key == 1 and s.size == 8


def test_hybrid_fixture_modes_differ():
    g = grid_from_rows(CORNER_RING)
    (op,) = summarize_components(g, mode="open")
    (cl,) = summarize_components(g, mode="closed")
    assert op.betti[1] == 0 and cl.betti[1] == 1


def test_count_rules():
    full = CellGrid(np.ones((6, 6), bool))
    s = summarize_components(full)
    assert all(count_N(s, k) == 0 for k in range(4))
    assert count_Nstar(s, 0) == 1 and count_Nstar(s) == 1
    ring = grid_from_rows([".....", ".###.", ".#.#.", ".###.", "....."])
    assert count_N(summarize_components(ring), 1) == 1


def test_window_must_match_grid():
    g = sample_window(WindowSpec.centered(2, 10), 0.5, 1)
    summarize_components(g, WindowSpec.centered(2, 10))
    with pytest.raises(GeometryError):
        summarize_components(g, WindowSpec.centered(2, 11))
    with pytest.raises(GeometryError):
        summarize_components(g, WindowSpec((1, 0), 10))


def test_closed_mode_capability():
    g = sample_coloring((4, 4, 4, 4), p=0.5, seed=0)
    with pytest.raises(CapabilityError):
        component_table(g, "closed")
    with pytest.raises(DomainError):
        component_table(g, "nope")


@pytest.mark.parametrize("mode", ["open", "closed"])
@pytest.mark.parametrize("d,side", [(2, 12), (3, 6)])
def test_table_matches_brute_force(mode, d, side):
    for seed in range(4):
        g = sample_coloring((side,) * d, p=0.5 + 0.05 * seed, seed=seed)
        t = component_table(g, mode)
        fast = [(tuple(int(x) for x in r), bool(b)) for r, b in zip(t.betti, t.touches)]
        assert fast == brute_force_types(g.occupancy, mode)


@given(st.integers(0, 2**32), st.floats(0.2, 0.8), st.sampled_from(["open", "closed"]))
@settings(max_examples=30, deadline=None)
def test_sum_invariants(seed, p, mode):
    g = sample_coloring((15, 15), p=p, seed=seed)
    s = summarize_components(g, mode=mode)
    t = component_table(g, mode)
    n = t.key_counts(False)
    ns = t.key_counts(True)
    assert sum(ns.values()) == len(s) == t.count
    assert sum(n.values()) == count_N(s)
    for k in set(ns) | set(n):
        assert count_N(s, k) == n.get(k, 0) <= ns.get(k, 0) == count_Nstar(s, k)
    # Euler characteristics of the clusters add up to that of the whole complex.
    chi = component_euler(t.labeling.labels, t.count, mode)
    assert np.array_equal(1 - chi, t.betti[:, 1])


def test_keys_and_json():
    assert homotopy_key((1, 3, 0), 2) == 3
    assert homotopy_key((1, 2, 1, 0), 3) == (2, 1)
    assert key_betti((2, 1), 2) == 1 and key_betti(4, 1) == 4
    with pytest.raises(DomainError):
        key_betti(4, 2)
    for key in (0, 7, (1, 0), (0, 2, 1)):
        assert parse_key(format_key(key)) == key
    s = summarize_components(grid_from_rows(["##.", "...", "..#"]))
    obj = json.loads(components_to_json(s))
    assert [o["size"] for o in obj] == [2, 1]
    assert obj[0]["bbox"] == [[0, 0], [0, 1]]


def test_three_dimensional_keys(hollow_cube):
    occ = np.zeros((5, 5, 5), bool)
    occ[1:4, 1:4, 1:4] = hollow_cube.occupancy
    (s,) = summarize_components(CellGrid(occ), mode="closed")
    assert s.type_key == (0, 1) and not s.touches_window_boundary
