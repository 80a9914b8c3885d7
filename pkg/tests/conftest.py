import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ftgemm.blocked import KernelParams
from ftgemm.select import DEFAULT_CATALOG, ShapeClass

settings.register_profile(
    "ftgemm", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ftgemm")

CATALOG_ROWS = list(DEFAULT_CATALOG.items())
SMALL = DEFAULT_CATALOG[ShapeClass.SMALL]
MEDIUM = DEFAULT_CATALOG[ShapeClass.MEDIUM]
LARGE = DEFAULT_CATALOG[ShapeClass.LARGE]
HUGE = DEFAULT_CATALOG[ShapeClass.HUGE]
TALL = DEFAULT_CATALOG[ShapeClass.TALL_SKINNY]


def zeros(m, n):
    return np.zeros((m, n), np.float32)


@pytest.fixture
def mats():
    def make(M, N, K, seed=0, bounds=(0.0, 1.0)):
        from ftgemm.matrix import random_matrix

        return random_matrix(M, K, seed, bounds), random_matrix(K, N, seed + 1, bounds)

    return make


# filled by test_acceptance; echoed after the run even when output is captured
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
