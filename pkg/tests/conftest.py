import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ssabench.universe import chain_universe, load_universe, ring_universe  # noqa: E402


@pytest.fixture(scope="session")
def hexagon():
    return load_universe("hexagon.json")


@pytest.fixture(scope="session")
def boxes2d():
    return load_universe("boxes_2d.json")


@pytest.fixture(scope="session")
def chain8():
    return chain_universe(8)


@pytest.fixture(scope="session")
def ring6():
    return ring_universe(6)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
