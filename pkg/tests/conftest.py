import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one acceptance line; they are repeated in the terminal summary."""
    def note(criterion: str, ok, detail: str):
        status = {True: "PASS", False: "FAIL", None: "REPORTED"}[ok]
        line = f"[{status}] criterion {criterion}: {detail}"
        _VERDICTS.append(line)
        print(line)
    return note


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
