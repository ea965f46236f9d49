import math

import numpy as np
import pytest

from pointcomb import (
    Box,
    IndicatorWeight,
    IntervalWindow,
    ModelComb,
    VanHoveBoxes,
    materialize,
)
from pointcomb.cps import fibonacci_cps

PHI = (1.0 + math.sqrt(5.0)) / 2.0


@pytest.fixture(scope="session")
def fib_cps():
    return fibonacci_cps()


@pytest.fixture(scope="session")
def fib_window():
    return IntervalWindow(-1.0, PHI - 1.0)


@pytest.fixture(scope="session")
def fib_comb(fib_cps, fib_window):
    return ModelComb(fib_cps, IndicatorWeight(fib_window))


@pytest.fixture(scope="session")
def fib_vh():
    return VanHoveBoxes(1, 1.0)


@pytest.fixture(scope="session")
def fib_patch_10k(fib_comb):
    """The large Fibonacci patch faithful on [-10001, 10001]; built once."""
    return materialize(fib_comb, Box([-10_001.0], [10_001.0]))


@pytest.fixture(scope="session")
def fib_patch_small(fib_cps, fib_window):
    return fib_cps.project_points(fib_window, Box([-220.0], [220.0]))


def example_34_points(limit=100.0):
    """The union over n of {n + k/n : 0 <= k < n}, restricted to [0, limit]."""
    pts = []
    n = 1
    while n <= limit:
        for k in range(n):
            x = n + k / n
            if x <= limit:
                pts.append(x)
        n += 1
    return np.array(sorted(set(pts)))
