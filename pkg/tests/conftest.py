import pytest
from hypothesis import settings

from sievelab.arithmetic import build_tables

settings.register_profile("sievelab", deadline=None)
settings.load_profile("sievelab")

# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small_tables():
    return build_tables(100_000)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
