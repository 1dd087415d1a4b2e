import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def unit_grid():
    from beltrami_dirichlet.grid import GridSpec

    return GridSpec(0j, 1.2, 64)


@pytest.fixture(scope="session")
def disk_mask(unit_grid):
    return np.abs(unit_grid.z) < 1
