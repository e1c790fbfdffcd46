import pytest
from hypothesis import settings

from driftstream.stream import AttributeSpec, Schema

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def binary_schema():
    return Schema((AttributeSpec.nominal("a", ("v1", "v2")),), ("A", "B"))


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
