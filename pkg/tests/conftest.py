import pytest

from contagion_cds.model import SymmetricCompetitorParams
from contagion_cds.pricing import build_schedule

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def p0():
    return SymmetricCompetitorParams(base_b=0.1, base_c=0.2, atten_b=0.05, atten_c=0.1)


@pytest.fixture(scope="session")
def sched():
    return build_schedule(5.0, 0.25, settlement_lag=0.1, rate=0.05)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
