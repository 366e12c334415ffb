"""Shared pytest plumbing: a criterion report section at the end of the run."""

LINES = []


def record(line: str):
    LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
