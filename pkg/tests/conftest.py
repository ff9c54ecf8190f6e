import numpy as np
import pytest

from gapdecomp.synthetic import SyntheticDgp


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def simple_dgp():
    """One mediator, two controls, theta = 1 and alpha * beta = 1."""
    return SyntheticDgp(n=2000, dim_w=2, gamma=[0.3, -0.2], alpha=[0.5],
                        delta=[[0.0], [0.0]], theta=1.0, beta=[2.0],
                        kappa=[0.0, 0.0], seed=5)


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def record_criterion(request):
    """Print and collect one PASS/FAIL line, then assert the outcome."""
    lines = request.config.stash.setdefault(_CRITERIA, [])

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        print(line)
        lines.append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
