"""Prints the collected acceptance criterion lines after the test run."""

import acceptance_report


def pytest_terminal_summary(terminalreporter):
    if not acceptance_report.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(acceptance_report.LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:02d} ({name}): {status}  {detail}")
