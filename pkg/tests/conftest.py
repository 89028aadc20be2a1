"""Shared pytest plumbing.

The acceptance tests append one line per criterion here; the terminal
summary hook replays them after the run so the pass/fail outcome of
every criterion is visible even though pytest captures stdout.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
