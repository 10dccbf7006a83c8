"""Shared test plumbing: the acceptance-criteria summary.

Acceptance tests record one line per criterion; the terminal summary
prints them all so a run shows PASS/FAIL per criterion at a glance.
"""
from __future__ import annotations

_CRITERIA: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _CRITERIA.append((name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line = f"{line}  ({detail})"
        terminalreporter.write_line(line)
