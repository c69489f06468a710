import numpy as np
import pytest

from bsframes.analysis import build_setup
from bsframes.bspline import make_bspline
from bsframes.gabor import GaborSystem, covering_shifts, modulation_range, sample_frame
from bsframes.targets import CylinderScatteringField, PointSourceField, TargetField

L, P, A, B = 3.0, 601, 1.0, 1.0 / 3.0


@pytest.fixture(scope="session")
def system():
    window = make_bspline(2)
    dx = L / (P - 1)
    return GaborSystem(window, A, B, covering_shifts(window.support, A, 0.0, L),
                       modulation_range(B, dx))


@pytest.fixture(scope="session")
def interest_frame(system):
    return sample_frame(system, build_setup(L, P).grid)


@pytest.fixture(scope="session")
def cylinder5():
    return TargetField(CylinderScatteringField(5.0), L)


@pytest.fixture(scope="session")
def point5():
    return TargetField(PointSourceField(5.0), L)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report one line each; printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
