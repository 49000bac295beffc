"""Shared test helpers and the acceptance-criteria summary hook."""

# the acceptance tests register one line per criterion here; the terminal
# summary hook below reprints them after the run so the pass/fail lines are
# visible even when pytest captures stdout
criterion_lines: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}"
    criterion_lines[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not criterion_lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(criterion_lines):
        terminalreporter.write_line(criterion_lines[number])
