import numpy as np
import pytest

from corruptlab.probkit import Dist, Domain, JointDist


def random_dist(rng, size, domain=None, sparse=False):
    mass = rng.dirichlet(np.full(size, 0.7))
    if sparse and size > 1:
        mass[rng.integers(size)] = 0.0
        mass /= mass.sum()
    return Dist(domain or Domain.range(size), mass)


def random_joint(rng, size, arity, alpha=0.5):
    mass = rng.dirichlet(np.full(size**arity, alpha)).reshape((size,) * arity)
    return JointDist(Domain.range(size), mass)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
