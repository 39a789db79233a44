import mpmath
import numpy as np
import pytest


def mp_dist(u, dps=50):
    """High-precision reference for dist(u)."""
    with mpmath.workdps(dps):
        w = [mpmath.exp(-mpmath.mpf(float(x))) for x in u]
        s = mpmath.fsum(w)
        return np.array([float(x / s) for x in w])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_instance(rng, m_lo=2, m_hi=10, spread=5.0):
    """Non-constant potential and an interior Dirichlet pmf."""
    m = int(rng.integers(m_lo, m_hi + 1))
    while True:
        u = rng.uniform(-spread, spread, m)
        if np.ptp(u) > 0:
            break
    r = rng.dirichlet(np.ones(m))
    return u, r
