import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Call ``acceptance(number, title, ok, detail)`` before asserting. A test
    that errors before recording still gets a FAIL line.
    """
    recorded = []

    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        recorded.append(line)
        _LINES.append((number, line))
        print(line)

    yield record
    if not recorded:
        _LINES.append((999, f"[FAIL] {request.node.name}: raised before reporting"))


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(line)
