import numpy as np
import pytest

from mixfrac import Atom, Density, Grid, SignedMeasure


def laplacian_only(sbar=1.0):
    return SignedMeasure((Atom(1.0, 1.0),), (), sbar)


# the four measures of the recursive/direct equivalence matrix
MEASURES = {
    "laplacian": SignedMeasure((Atom(1.0, 1.0),), ()),
    "laplacian_plus_identity": SignedMeasure((Atom(1.0, 1.0), Atom(0.0, 1.0)), ()),
    "signed": SignedMeasure((Atom(1.0, 1.0),), (Atom(0.25, 0.05),), 0.5),
    "atom_plus_density": SignedMeasure((Atom(0.75, 1.0), Density(0.0, 0.5, 1.0)), (), 0.5),
}


def closed_form_laplacian_spectrum(n, h):
    k = np.arange(1, n + 1)
    return 4.0 / h**2 * np.sin(k * np.pi * h / 2.0) ** 2


@pytest.fixture
def unit_grid():
    return Grid(0.0, 1.0, 63)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LOG: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LOG):
            terminalreporter.write_line(line)
