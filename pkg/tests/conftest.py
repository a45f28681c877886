import numpy as np
import pytest

from roughtail.rough_path import PiecewiseLinearPath, lift


@pytest.fixture(scope="session", autouse=True)
def _warm_numba():
    from roughtail.experiments import warm_kernels
    warm_kernels()


def random_path(rng, n, d, scale=1.0, uniform_grid=True):
    if uniform_grid:
        times = np.linspace(0.0, 1.0, n + 1)
    else:
        times = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, n - 1)]))
    values = np.cumsum(rng.standard_normal((n + 1, d)), axis=0) * scale
    values -= values[0]
    return PiecewiseLinearPath(times, values)


def random_lift(rng, n, d, level, scale=1.0, uniform_grid=True):
    return lift(random_path(rng, n, d, scale, uniform_grid), level)


def random_group_element(rng, d, level, scale=1.0):
    """Group-like element: signature of a short random piecewise-linear path."""
    x = random_lift(rng, 4, d, level, scale)
    return x.increment(0, 4)
