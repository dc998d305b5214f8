import numpy as np
import pytest

from cubiperc import BettiVector, CellGrid, betti1_planar, betti_bound_check, betti_numbers
from cubiperc.clusters import summarize_components
from cubiperc.complex import CubicalComplex, build_complex, euler_characteristic
from cubiperc.errors import ConsistencyError, DomainError
from cubiperc.homology import gf2_rank, is_connected
from cubiperc.reference import closed_faces, dense_betti, dense_gf2_rank, inductive_open_faces
from cubiperc.selfcheck import all_colorings

from conftest import grid_from_rows

NESTED_RINGS = [
    "#######",
    "#.....#",
    "#.###.#",
    "#.#.#.#",
    "#.###.#",
    "#..#..#",
    "#######",
]


def test_empty_complex():
    assert betti_numbers(CubicalComplex.empty(2)) == (0, 0, 0)


@pytest.mark.parametrize("mode", ["open", "closed"])
def test_annulus(annulus, mode):
    b = betti_numbers(build_complex(annulus, mode))
    assert b == (1, 1, 0) and b.euler == 0


@pytest.mark.parametrize("mode", ["open", "closed"])
def test_hollow_cube(hollow_cube, mode):
    b = betti_numbers(build_complex(hollow_cube, mode))
    assert b == (1, 0, 1, 0) and b.euler == 2


def test_solid_cube_and_4d():
    assert betti_numbers(build_complex(CellGrid(np.ones((3, 3, 3), bool)), "closed")) == (1, 0, 0, 0)
    occ = np.ones((3, 3, 3, 3), dtype=bool)
    occ[1, 1, 1, 1] = False
    assert betti_numbers(build_complex(CellGrid(occ), "open")) == (1, 0, 0, 1, 0)


def test_planar_shortcut():
    assert betti1_planar(build_complex(grid_from_rows(["#"]), "open")) == 0
    assert betti1_planar(build_complex(grid_from_rows(["###", "#.#", "###"]), "closed")) == 1
    rings = build_complex(grid_from_rows(NESTED_RINGS), "open")
    assert betti1_planar(rings) == 2
    assert betti_numbers(rings) == (1, 2, 0)


def test_planar_shortcut_preconditions(hollow_cube):
    with pytest.raises(DomainError):
        betti1_planar(build_complex(hollow_cube, "open"))
    with pytest.raises(DomainError):
        betti1_planar(build_complex(grid_from_rows(["#.#"]), "open"))
    assert not is_connected(build_complex(grid_from_rows(["#.#"]), "open"))


def test_all_3x3_colorings_match_dense_oracle():
    for mode in ("open", "closed"):
        for _, occ in all_colorings():
            cx = build_complex(CellGrid(occ), mode)
            b = betti_numbers(cx)
            cells = {tuple(int(i) for i in z) for z in np.argwhere(occ)}
            faces = inductive_open_faces(cells, 2) if mode == "open" else closed_faces(cells, 2)
            assert tuple(b) == dense_betti(faces)
            assert b.euler == euler_characteristic(cx)


@pytest.mark.parametrize("seed", range(5))
def test_random_3d_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    occ = rng.random((4, 4, 4)) < 0.55
    cells = {tuple(int(i) for i in z) for z in np.argwhere(occ)}
    for mode, faces in (("open", inductive_open_faces(cells, 3)), ("closed", closed_faces(cells, 3))):
        assert tuple(betti_numbers(build_complex(CellGrid(occ), mode))) == dense_betti(faces)


def test_gf2_rank_matches_dense():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = (rng.random((8, 11)) < 0.3).astype(np.uint8)
        cols = [int("".join(map(str, m[::-1, j])), 2) for j in range(m.shape[1])]
        assert gf2_rank(cols) == dense_gf2_rank(m)


def test_betti_vector():
    b = BettiVector([1, 2, 0])
    assert b == (1, 2, 0) and b.euler == -1


def test_betti_bound_examples(annulus):
    single = summarize_components(grid_from_rows(["#"]))[0]
    assert betti_bound_check(single, 1, 2)
    ring = summarize_components(annulus)[0]
    assert ring.size == 8 and ring.betti[1] == 1
    assert betti_bound_check(ring, 1, 2)


def test_betti_bound_random():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = CellGrid(rng.random((10, 10)) < 0.5)
        for s in summarize_components(g, mode="closed"):
            for k in range(3):
                assert betti_bound_check(s, k, 2)


def test_betti_bound_violation_raises():
    from cubiperc.clusters import ComponentSummary

    fake = ComponentSummary(1, 1, ((0, 0), (0, 0)), False, BettiVector([1, 5, 0]), 5)
    with pytest.raises(ConsistencyError):
        betti_bound_check(fake, 1, 2)
