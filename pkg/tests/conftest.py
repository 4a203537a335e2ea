import pytest

REPORT = []


def report(criterion: str, ok: bool, detail: str) -> None:
    REPORT.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)


@pytest.fixture
def example_text():
    return "1 x -2 y <= 1\n-1 y 3 z >= -1\n1 x -6 z >= 4\n"
