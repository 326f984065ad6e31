import pytest

from sis_invariance.spectrum import FrequencyGrid, evaluate, indicator

M, K = 256, 16


@pytest.fixture
def grid():
    return FrequencyGrid(M, K)


def sampled(*intervals, grid=None):
    """Sample the indicator of a union of intervals on the default grid."""
    return evaluate(indicator(*intervals), grid or FrequencyGrid(M, K))
