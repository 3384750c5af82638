import numpy as np
import pytest

from bosonsampling.core import balanced_splitter, published_matrix, random_unitary

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def splitter():
    return balanced_splitter()


@pytest.fixture
def haar6():
    return random_unitary(6, 7)


@pytest.fixture
def measured2():
    return published_matrix("2photon")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
