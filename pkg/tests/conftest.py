import numpy as np
import pytest

from cubiperc import CellGrid

# Lines collected by the acceptance suite and echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def grid_from_rows(rows, origin=None):
    """Grid from strings like ``"#.#"``; row i is array index i on axis 0."""
    occ = np.array([[c == "#" for c in r] for r in rows], dtype=bool)
    return CellGrid(occ, origin)


@pytest.fixture
def annulus():
    return grid_from_rows(["###", "#.#", "###"])


@pytest.fixture
def hollow_cube():
    occ = np.ones((3, 3, 3), dtype=bool)
    occ[1, 1, 1] = False
    return CellGrid(occ)
