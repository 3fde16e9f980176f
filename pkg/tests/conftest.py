"""Shared fixtures: acceptance-criterion reporting and backend cycling."""

from __future__ import annotations

import pytest

_ACCEPTANCE_LINES: list[tuple[int, str]] = []


class CriterionRecorder:
    """Collects one pass/fail line per acceptance criterion for the
    end-of-run summary, then asserts."""

    def check(self, number: int, name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        line = f"acceptance {number:2d} [{name}]: {status}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE_LINES.append((number, line))
        assert ok, line


@pytest.fixture(scope="session")
def criterion() -> CriterionRecorder:
    return CriterionRecorder()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
