import pytest

from porcupine import canonical_pair


@pytest.fixture(scope="session")
def pair():
    return canonical_pair()


ACCEPTANCE_LINES = []


@pytest.fixture()
def acceptance_log():
    """Record one PASS/FAIL line per acceptance criterion."""
    def log(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
