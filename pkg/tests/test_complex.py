import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubiperc import CellGrid, CubicalComplex, FaceKey, euler_characteristic
from cubiperc.complex import build_closed_complex, build_complex, build_open_complex
from cubiperc.errors import DomainError
from cubiperc.reference import closed_faces, inductive_open_faces

from conftest import grid_from_rows


def as_sets(cx):
    return [set((tuple(f.anchor), tuple(f.axes)) for f in fs) for fs in cx.faces]


def test_single_cell():
    g = grid_from_rows(["#"])
    assert build_open_complex(g).face_counts() == (1, 0, 0)
    assert build_closed_complex(g).face_counts() == (4, 4, 1)


def test_two_adjacent_cells_open():
    assert build_open_complex(grid_from_rows(["##"])).face_counts() == (2, 1, 0)


def test_full_block_open():
    assert build_open_complex(grid_from_rows(["##", "##"])).face_counts() == (4, 4, 1)


def test_diagonal_cells():
    g = grid_from_rows(["#.", ".#"])
    assert build_closed_complex(g).face_counts() == (7, 8, 2)
    open_cx = build_open_complex(g)
    assert open_cx.face_counts() == (2, 0, 0)


def test_empty_grid_gives_empty_complex():
    g = CellGrid(np.zeros((4, 4), dtype=bool))
    for mode in ("open", "closed"):
        cx = build_complex(g, mode)
        assert cx.is_empty() and euler_characteristic(cx) == 0
    assert CubicalComplex.empty(3).face_counts() == (0, 0, 0, 0)


def test_euler_examples(annulus):
    assert euler_characteristic(build_open_complex(grid_from_rows(["#"]))) == 1
    assert euler_characteristic(build_closed_complex(annulus)) == 0
    assert euler_characteristic(build_open_complex(annulus)) == 0


def test_faces_use_lattice_coordinates():
    g = CellGrid.from_cells((2, 2), [(5, -3)], origin=(5, -3))
    cx = build_closed_complex(g)
    assert FaceKey((5, -3), (0, 1)) in cx
    assert FaceKey((6, -2), ()) in cx
    assert FaceKey((7, -2), ()) not in cx


def test_boundary_of_square():
    sq = FaceKey((0, 0), (0, 1))
    assert sorted(sq.boundary()) == sorted(
        [FaceKey((0, 0), (1,)), FaceKey((1, 0), (1,)), FaceKey((0, 0), (0,)), FaceKey((0, 1), (0,))]
    )
    assert sq.dim == 2


def test_bad_mode():
    with pytest.raises(DomainError):
        build_complex(grid_from_rows(["#"]), "weird")


def random_grid(d, side, p, seed):
    rng = np.random.default_rng(seed)
    return CellGrid(rng.random((side,) * d) < p, tuple(range(-1, d - 1)))


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("seed", range(6))
def test_open_complex_matches_inductive_rule(d, seed):
    g = random_grid(d, 4, 0.6, seed)
    cx = build_open_complex(g)
    assert as_sets(cx) == inductive_open_faces(g.black_cells(), d)
    assert cx.is_closed_under_faces()


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("seed", range(6))
def test_closed_complex_matches_cube_union(d, seed):
    g = random_grid(d, 4, 0.5, seed)
    cx = build_closed_complex(g)
    assert as_sets(cx) == closed_faces(g.black_cells(), d)
    assert cx.is_closed_under_faces()


@given(st.lists(st.booleans(), min_size=25, max_size=25), st.sampled_from(["open", "closed"]))
@settings(max_examples=60, deadline=None)
def test_dump_parse_round_trip(bits, mode):
    g = CellGrid(np.array(bits).reshape(5, 5))
    cx = build_complex(g, mode)
    again = CubicalComplex.parse(cx.dump(), 2, mode)
    assert as_sets(again) == as_sets(cx)
