import pytest

_acceptance_lines = []


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, title, passed, detail):
        _acceptance_lines.append(f"{'PASS' if passed else 'FAIL'}  [{number}] {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
