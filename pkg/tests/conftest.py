import numpy as np
import pytest

from frac_hardy.assembly import assemble_problem
from frac_hardy.geometry import Disk, Interval, unit_square
from frac_hardy.mesh import mesh_domain_2d, mesh_interval
from frac_hardy.special_constants import FracParams


@pytest.fixture(scope="session")
def square():
    return unit_square()


@pytest.fixture(scope="session")
def disk():
    return Disk(np.zeros(2), 1.0)


@pytest.fixture(scope="session")
def square_problem(square):
    m = mesh_domain_2d(square, 1 / 8)
    return assemble_problem(m, square, FracParams(2, 0.75))


@pytest.fixture(scope="session")
def interval_problem():
    d = Interval(0.0, 1.0)
    return assemble_problem(mesh_interval(64), d, FracParams(1, 0.75))


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(k: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[k] = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
        print(ACCEPTANCE_LINES[k])
        assert ok, ACCEPTANCE_LINES[k]

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
