import re

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion.

    Usage: ``criterion("3b", ok, "detail")`` then assert ``ok`` as usual.
    """

    def record(cid, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    def order(line):
        num, suffix = re.match(r"(\d+)(\w*)", line.split("criterion ")[1]).groups()
        return int(num), suffix

    for line in sorted(ACCEPTANCE_LINES, key=order):
        terminalreporter.write_line(line)
