import itertools
import random
from pathlib import Path

import pytest

from calabi_cone import exactgeom as eg
from calabi_cone.fan import Fan

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

C3 = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
QUADRIC = [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
TWO_POINTS = [(0, 0, 1), (0, 1, 1), (1, 2, 1), (2, 1, 1), (1, 0, 1)]
CUBIC_CONE = [(0, 0, 1), (3, 0, 1), (0, 3, 1)]
DP1_CONE = [(1, 0, 1), (0, 1, 1), (-1, -1, 1)]

TWO_POINTS_XI = 9 / 16 * (-1 + 33 ** 0.5)


def random_unimodular(rng: random.Random, n: int = 3, steps: int = 6):
    """Product of random elementary matrices and signed permutations."""
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        for r in range(n):
            m[r][i] += c * m[r][j]
    perm = list(range(n))
    rng.shuffle(perm)
    m = [[m[r][perm[c]] for c in range(n)] for r in range(n)]
    assert abs(eg.det(m)) == 1
    return m


def apply(m, v):
    return tuple(sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(m)))


def random_polygon(rng: random.Random, box: int = 3, npts: int = 5):
    while True:
        pts = {(rng.randint(0, box), rng.randint(0, box)) for _ in range(npts)}
        try:
            return eg.LatticePolygon.from_points(list(pts))
        except Exception:
            continue


def random_gorenstein_cone(rng: random.Random, box: int = 3, npts: int = 5, transform=True):
    """Cone over a random lattice polygon at height 1, optionally moved by a unimodular map."""
    poly = random_polygon(rng, box, npts)
    gens = [(x, y, 1) for x, y in poly.vertices]
    if transform:
        m = random_unimodular(rng)
        gens = [apply(m, g) for g in gens]
    return Fan.from_cone(gens)


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def two_points():
    return Fan.from_cone(TWO_POINTS)


@pytest.fixture
def c3():
    return Fan.from_cone(C3)


@pytest.fixture
def quadric():
    return Fan.from_cone(QUADRIC)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
