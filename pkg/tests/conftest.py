import sys
from pathlib import Path

import pytest

from zerosurf.field import Constant, Sphere, Torus, parse_expression
from zerosurf.surface import attach_normals, seed_sphere, seed_torus

sys.path.insert(0, str(Path(__file__).parent))

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="session")
def sphere_u():
    return Sphere()


@pytest.fixture(scope="session")
def one():
    return Constant(1.0)


@pytest.fixture(scope="session")
def unit_sphere_seed(sphere_u):
    return attach_normals(seed_sphere(1.0, 2), sphere_u)


@pytest.fixture(scope="session")
def fine_sphere_seed(sphere_u):
    return attach_normals(seed_sphere(1.0, 3), sphere_u)


@pytest.fixture(scope="session")
def torus_u():
    return Torus(2.0, 0.5)


@pytest.fixture(scope="session")
def torus_seed(torus_u):
    return attach_normals(seed_torus(2.0, 0.5, 16, 8), torus_u)


@pytest.fixture(scope="session")
def x1_field():
    return parse_expression("x1")


@pytest.fixture(scope="session")
def x3_field():
    return parse_expression("x3")


@pytest.fixture(scope="session")
def configs_dir():
    return CONFIGS


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
