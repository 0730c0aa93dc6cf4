import numpy as np
import pytest

from endfire_de.cli import reference_tables
from endfire_de.em import ModelParams


@pytest.fixture(scope="session")
def ref():
    return reference_tables()


@pytest.fixture(scope="session")
def p():
    return ModelParams()


def random_layout_lambda(rng, N, lo=0.08, hi=0.5):
    return np.concatenate([[0.0], np.cumsum(rng.uniform(lo, hi, N - 1))])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
