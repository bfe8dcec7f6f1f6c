import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from icbench import cycle_env, gated_corridor, parse_env  # noqa: E402

C3_TEXT = "env c3\nstates 3\nactions 1\nt 0 0 1\nt 1 0 2\nt 2 0 0"


@pytest.fixture
def c3():
    return parse_env(C3_TEXT)


@pytest.fixture
def cycle3():
    return cycle_env(3)


@pytest.fixture
def corridor10():
    return gated_corridor("10")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
