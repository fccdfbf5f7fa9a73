import pytest

# one line per acceptance criterion, shown at the end of the run
VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def verdicts():
    return VERDICTS


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
