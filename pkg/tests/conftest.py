import numpy as np
import pytest

_VERDICTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line, then assert it."""

    def record(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
