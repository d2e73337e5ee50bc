import numpy as np
import pytest

from jamlim import nn_exclusion


@pytest.fixture
def nn1():
    return nn_exclusion(1, 1, "l1")


@pytest.fixture
def nn2():
    return nn_exclusion(2, 1, "l1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
