import numpy as np
import pytest

from pdext.kernel import DomainSet, builtin_kernel
from pdext.measure import DiscreteMeasure, cauchy_density


@pytest.fixture(scope="session")
def unit():
    return DomainSet.interval(0.0, 1.0)


@pytest.fixture(scope="session")
def expneg(unit):
    """``exp(-|x|)`` known on ``(-1, 1)``."""
    return builtin_kernel("exponential", unit)


@pytest.fixture(scope="session")
def cauchy():
    return cauchy_density()


@pytest.fixture(scope="session")
def two_atoms():
    return DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Record and print one acceptance verdict, then assert it."""

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} | {detail}"
        ACCEPTANCE[number] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
