"""Shared pytest wiring: the acceptance-criteria pass/fail reporter."""

CRITERION_LINES: list[str] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    """Log one acceptance criterion's outcome; printed inline and in the summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    CRITERION_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
