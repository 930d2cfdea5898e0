import numpy as np
import pytest

from zerosel.data import make_rng

ACCEPTANCE_LINES = []


def random_instance(seed, n=12, d=5, m=3, c=3):
    """Gaussian features/attributes with every class present (shuffled round robin)."""
    rng = make_rng(seed, 99)
    x = rng.standard_normal((n, d))
    labels = np.arange(n) % c
    rng.shuffle(labels)
    attrs = rng.standard_normal((c, m))
    return x, labels, attrs


@pytest.fixture
def record_criterion():
    def record(name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
