import pytest

from padefaber.geometry import disk, ellipse, segment

ACCEPTANCE_LINES: list = []

GEOMETRIES = {
    "disk": disk(0.5 + 0.2j, 1.5),
    "segment": segment(),
    "ellipse": ellipse(0.1, 0.4, 1.0, 2.0),
}


@pytest.fixture(params=sorted(GEOMETRIES))
def geometry(request):
    return GEOMETRIES[request.param]


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
