"""Shared test configuration.

Prints one PASS/FAIL line per acceptance criterion at the end of a run so
the acceptance suite doubles as a checklist.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results: list[tuple[str, str]] = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(report, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                results.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, status in sorted(results):
        terminalreporter.write_line(f"{status}  {name}")
