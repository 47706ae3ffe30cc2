from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from unitselect.core import BenefitFunction, from_counts
from unitselect.sim import sample_consistent

TASK1 = (0, 1, 1, -1, 0, 1, -1, -1, 0)
TASK2 = (0, 1, 2, -1, 0, 1, -2, -1, 0)

DATA = Path(__file__).resolve().parent.parent / "data"

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def vaccine():
    """Counts from the vaccine clinical study: (experimental, observational)."""
    return from_counts([[52, 512, 36], [329, 58, 213]], [[14, 933, 6], [121, 65, 61]])


@pytest.fixture(scope="session")
def task1():
    return BenefitFunction.from_vector(2, 3, TASK1)


@pytest.fixture(scope="session")
def task2():
    return BenefitFunction.from_vector(2, 3, TASK2)


def random_instances(seed, shapes, count, grid=2**6):
    """Seeded valid (fractions, exp, obs) triples drawn from a consistent joint.

    A coarse grid makes zero cells and ties common, which is where bound
    formulas tend to break.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        m, n = shapes[k % len(shapes)]
        out.append(sample_consistent(rng, m, n, grid))
    return out


def random_vector(rng, size, identifiable=False, m=None, n=None):
    if identifiable:
        # a combination of experimental margins is identifiable by construction
        from unitselect.core import all_assignments
        weights = {(r, i): Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
                   for r in range(1, m + 1) for i in range(1, n + 1)}
        return [sum((weights[(r, a[r - 1])] for r in range(1, m + 1)), Fraction(0))
                for a in all_assignments(m, n)]
    return [Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 5))) for _ in range(size)]


def record_acceptance(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
