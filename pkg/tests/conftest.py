import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hodgebound.geometry import Ball, DomainSpec, Hole, Polytope
from hodgebound.meshgen import mesh2d, mesh_domain, rectangle_loop

settings.register_profile(
    "artifact", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("artifact")


def box(x0, y0, x1, y1):
    return Polytope(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float))


@pytest.fixture(scope="session")
def square_mesh():
    return mesh2d([rectangle_loop(0, 0, 1, 1)], 0.1)


@pytest.fixture(scope="session")
def annulus_spec():
    return DomainSpec(2, Ball(np.zeros(2), 2.0), [Hole(np.zeros(2), 1.0)])


@pytest.fixture(scope="session")
def annulus_mesh(annulus_spec):
    return mesh_domain(annulus_spec, 0.15)


@pytest.fixture(scope="session")
def shell_mesh():
    spec = DomainSpec(3, Ball(np.zeros(3), 2.0), [Hole(np.zeros(3), 1.0)])
    return mesh_domain(spec, 0.4)


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
