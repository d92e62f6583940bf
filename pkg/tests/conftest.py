import cmath
import math

import numpy as np
import pytest

from carleson_frames import make_geometric_real


def brute_delta(points):
    """Carleson constant of a finite point list by plain double loop."""
    best = 1.0
    for k, zk in enumerate(points):
        prod = 1.0
        for j, zj in enumerate(points):
            if j != k:
                prod *= abs(zk - zj) / abs(1 - zj.conjugate() * zk)
        best = min(best, prod)
    return best


def brute_entry(z, lam):
    z = complex(z)
    r, th = abs(z), cmath.phase(z)
    if th >= math.pi:
        th -= 2 * math.pi
    return cmath.exp(lam * (math.log(r) + 1j * th)) * math.sqrt(1 - r * r)


@pytest.fixture(scope="session")
def geo12():
    return make_geometric_real(0.5, 0.5, 12)


@pytest.fixture(scope="session")
def geo20():
    return make_geometric_real(0.5, 0.5, 20)


@pytest.fixture(scope="session")
def geo48():
    return make_geometric_real(0.5, 0.5, 48)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
