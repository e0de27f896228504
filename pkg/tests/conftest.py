import numpy as np
import pytest

from martblocks import Filtration, NCFiltration
from martblocks.experiments import gen_filtration


@pytest.fixture
def omega4():
    """Four equally weighted points: trivial, two halves, discrete."""
    return Filtration([0.25] * 4, [[0, 0, 0, 0], [0, 0, 1, 1], [0, 1, 2, 3]])


@pytest.fixture
def m2chain():
    """Scalars, diagonal pinch, full 2x2 matrices."""
    return NCFiltration.m2chain()


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def random_instance(rng, points=16, depth=5, measurable=True):
    """Random filtration and a random function on it."""
    from martblocks import cond_exp
    F = gen_filtration(rng, int(rng.integers(1, points + 1)),
                       int(rng.integers(1, depth + 1)))
    f = rng.standard_normal(F.n) * rng.uniform(0.1, 5)
    if rng.random() < 0.3:
        f = np.round(f)
    return F, (cond_exp(f, F, F.depth) if measurable else f)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
