import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from radarbench import coverage, terrain


@pytest.fixture
def flat_instance():
    grid = terrain.ElevationGrid(np.zeros((30, 30)), name="flat-zero")
    return coverage.Instance(grid=grid)


@pytest.fixture
def hilly_instance():
    grid = terrain.generate_synthetic(3, terrain.MOUNTAINOUS, name="hills3")
    return coverage.Instance(grid=grid)
