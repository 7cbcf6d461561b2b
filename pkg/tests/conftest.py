import numpy as np
import pytest

_CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(20140513)


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for the acceptance summary."""

    def record(number, name, ok, detail=""):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}"
        if detail:
            line += f"  ({detail})"
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
