import math

import pytest

from esa.energy import kinetic_beta
from esa.spectral import FrequencyGrid

SQRT2PI = math.sqrt(2 * math.pi)


@pytest.fixture(scope="session")
def grid():
    return FrequencyGrid(8192)


@pytest.fixture(scope="session")
def beta1():
    return kinetic_beta(1.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
