import pytest

_lines: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record the outcome of one acceptance criterion for the end-of-run summary."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_lines):
        terminalreporter.write_line(_lines[number])
