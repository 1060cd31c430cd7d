import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            if rep.when != "call" and outcome == "passed":
                continue
            name = nodeid.split("::")[-1]
            number = int(name.split("_")[2])
            lines.append((number, "PASS" if outcome == "passed" else "FAIL", name))
    if lines:
        terminalreporter.section("acceptance criteria")
        seen = set()
        for number, verdict, name in sorted(lines):
            if number in seen:
                continue
            seen.add(number)
            terminalreporter.write_line(f"criterion {number:2d}: {verdict}  ({name})")
