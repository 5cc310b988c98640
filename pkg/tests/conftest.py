import numpy as np
import pytest

from hypflow import flows, solver
from hypflow.fields import PolarGrid


@pytest.fixture(scope="session")
def grid128():
    return PolarGrid.from_geodesic(1.0, 1.0, 8.0, 128, 64)


@pytest.fixture(scope="session")
def cos_trace():
    return flows.BoundaryTrace((0.0, 1.0), (0.0, 0.0))


@pytest.fixture(scope="session")
def potential_state(grid128, cos_trace):
    return flows.potential_flow(flows.poisson_harmonic(cos_trace, grid128), 1.0)


@pytest.fixture(scope="session")
def rotating_solve():
    cfg = solver.SolverConfig(a=1.0, R0=1.0, R_out=8.0, n_r=128, n_theta=32, wall_speed=0.5, R1=2.0)
    return solver.picard_solve(cfg)


@pytest.fixture(scope="session")
def modulated_solve():
    cfg = solver.SolverConfig(a=1.0, R0=1.0, R_out=7.0, n_r=96, n_theta=32, wall_speed=0.3,
                              wall_cos=(0.5,), wall_sin=(0.0, 0.2), R1=2.0)
    return solver.picard_solve(cfg)


def rng(seed=0):
    return np.random.default_rng(seed)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion; printed in the terminal summary."""

    def record(n: int, passed: bool, text: str, seconds: float):
        line = f"{'PASS' if passed else 'FAIL'} acceptance {n}: {text} [{seconds:.2f} s]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
