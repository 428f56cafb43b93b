import pytest

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def criterion():
    """``criterion(number, title, passed, detail)`` records one acceptance line."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
