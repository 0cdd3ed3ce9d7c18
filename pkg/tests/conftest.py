import contextlib

import pytest

ACCEPTANCE_LINES = []


@contextlib.contextmanager
def _record(num, name):
    try:
        yield
    except BaseException:
        line = "ACCEPTANCE %02d %s: FAIL" % (num, name)
        print(line, flush=True)
        ACCEPTANCE_LINES.append(line)
        raise
    line = "ACCEPTANCE %02d %s: PASS" % (num, name)
    print(line, flush=True)
    ACCEPTANCE_LINES.append(line)


@pytest.fixture
def criterion():
    """Context manager recording one acceptance pass/fail line."""
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
