import math

import numpy as np
import pytest

from spinladder import SpinSystem

_criteria: list[str] = []


@pytest.fixture
def sys72():
    return SpinSystem()


@pytest.fixture
def rng():
    return np.random.default_rng(20061016)


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _criteria.append(f"[criterion {number}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)


def phase_equal(u, v, atol=1e-10):
    """u == e^{i a} v for some a."""
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    g = u[k] / v[k]
    return abs(abs(g) - 1) < atol and np.allclose(u, g * v, atol=atol)


Y = math.pi / 2
