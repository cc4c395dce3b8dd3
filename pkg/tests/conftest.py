import numpy as np
import pytest

from timnoma import preset


@pytest.fixture
def mimo():
    return preset("paper-mimo-4u")


@pytest.fixture
def siso():
    return preset("paper-siso-5u")


@pytest.fixture
def rng():
    return np.random.default_rng(20150608)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
