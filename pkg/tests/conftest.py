import pytest

_LINES = []


class Criterion:
    """Records one acceptance line and prints it as soon as it is known."""

    def __init__(self, number, title):
        self.number, self.title = number, title

    def report(self, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {self.number}: {self.title} -- {detail}"
        _LINES.append((self.number, line))
        print(line)
        return ok


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
