import numpy as np
import pytest

from metascope.core import ArrayGeometry, FrequencySpec, MetaAtomResponse
from metascope.field import FeedModel

F_C = 3.0e9


@pytest.fixture(scope="session")
def geom():
    return ArrayGeometry(20, 20, 0.05, 0.364)


@pytest.fixture(scope="session")
def freq():
    return FrequencySpec(F_C)


@pytest.fixture(scope="session")
def response():
    return MetaAtomResponse.default()


@pytest.fixture(scope="session")
def ideal():
    return MetaAtomResponse.ideal()


@pytest.fixture(scope="session")
def feed():
    return FeedModel()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(number: int, name: str, ok: bool, detail: str):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        lines.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
