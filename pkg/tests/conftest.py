import pytest

_REPORT: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""
    def _record(number: int, ok: bool, detail: str) -> bool:
        _REPORT[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_REPORT[number])
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_REPORT):
            terminalreporter.write_line(_REPORT[k])
