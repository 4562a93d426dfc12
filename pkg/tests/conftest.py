import numpy as np
import pytest

from ising_screen.model import SampleSet, node_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_problem(rng, n=40, p=6, j=None):
    """Node problem on uniformly random spins (no model structure needed)."""
    Z = rng.choice([-1, 1], size=(n, p))
    j = int(rng.integers(p)) if j is None else j
    return node_problem(SampleSet(Z), j)


_VERDICTS_KEY = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert on it."""
    lines = request.config.stash.setdefault(_VERDICTS_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
