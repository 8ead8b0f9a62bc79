import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pfsim.world import OccupancyGrid


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def grid_from_array(cells, resolution=0.1, origin=(0.0, 0.0)):
    cells = np.asarray(cells, np.float64)
    h, w = cells.shape
    return OccupancyGrid(resolution=resolution, width=w, height=h,
                        origin=origin, cells=cells)


@pytest.fixture
def empty_grid():
    return OccupancyGrid(resolution=0.1, width=40, height=40)
