import numpy as np
import pytest

from biasexpr import ResourceDistribution, ResourceSet, TargetFunction


def explicit(masses, weights=None):
    """(distribution, strategies) for explicit-strategy resources."""
    rs = ResourceSet.from_strategies(masses)
    strategies = {r.id: r.payload.strategy for r in rs.resources}
    d = ResourceDistribution.uniform(rs) if weights is None else ResourceDistribution(rs, weights)
    return d, strategies


@pytest.fixture
def two_point():
    """Point masses at both ends of a 4-element space, weighted equally."""
    return explicit([[1, 0, 0, 0], [0, 0, 0, 1]])


@pytest.fixture
def spike_and_flat():
    return explicit([[1, 0, 0, 0], [0.25] * 4])


@pytest.fixture
def t0():
    return TargetFunction(4, (0,))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def record():
    """Store the one-line verdict for an acceptance criterion."""

    def _record(criterion: str, passed: bool, detail: str) -> bool:
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES[criterion] = line
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=int):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
