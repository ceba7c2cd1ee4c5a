import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def t123():
    """2x2x2 tensor with x_ijk = i + 2(j-1) + 4(k-1), i.e. values 1..8 in canonical order."""
    t = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                t[i, j, k] = (i + 1) + 2 * j + 4 * k
    return t
