import pytest

from logcycles.exact import log_h_sequence
from logcycles.weights import constant, log_power


@pytest.fixture(scope="session")
def k1():
    return log_power(1)


@pytest.fixture(scope="session")
def k2():
    return log_power(2)


@pytest.fixture(scope="session")
def uniform():
    return constant(1.0)


@pytest.fixture(scope="session")
def h_k1_2_14(k1):
    return log_h_sequence(k1, 2**14)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda s: (int("".join(c for c in s if c.isdigit())), s)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
