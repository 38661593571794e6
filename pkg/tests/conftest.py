"""Shared pytest wiring for the acceptance gate.

Each acceptance check reports one human-readable verdict line through the
``criterion_log`` fixture.  The lines are replayed in a terminal section
after the run so the verdicts stay visible even though pytest captures
stdout of passing tests.
"""

from __future__ import annotations

import pytest

_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_log():
    def log(line: str) -> None:
        _LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
