from __future__ import annotations

import re

import pytest

_LINES = pytest.StashKey[dict]()
_NAME = re.compile(r"test_criterion_(\d+)")
CRITERIA = range(1, 11)


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[_LINES][number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_LINES]
    seen = {int(m.group(1)) for r in terminalreporter.stats.get("failed", []) if (m := _NAME.search(r.nodeid))}
    if not lines and not seen:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        if n in lines:
            terminalreporter.write_line(lines[n])
        elif n in seen:
            terminalreporter.write_line(f"criterion {n:>2}: FAIL  (raised before reporting)")
        else:
            terminalreporter.write_line(f"criterion {n:>2}: NOT RUN")
