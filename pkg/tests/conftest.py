import pytest

from speciation import preset_scheme


@pytest.fixture(scope="session")
def tris_borate():
    return preset_scheme("tris-borate")


@pytest.fixture(scope="session")
def acid_base():
    return preset_scheme("acid-base")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
