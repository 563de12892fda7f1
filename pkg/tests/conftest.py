import numpy as np
import pytest

from slhz.parity_code import fill_symmetric, num_physical


def random_spins(n, rng, p=0.5):
    vals = np.where(rng.random(num_physical(n)) < p, -1, 1)
    return fill_symmetric(n, vals)


def random_logical(n, rng):
    return np.where(rng.random(n) < 0.5, -1, 1).astype(np.int8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line; the lines are echoed at the end of the run."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
