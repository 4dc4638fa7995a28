"""
Shared fixtures: the shipped skeleton, default forward-model settings and a
small grid for fast fits.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import HeatmapGrid, RadarParams, default_skeleton
from src.dipr import InitConfig
from src.renderer import RenderKernelParams

ANCHOR = (3.0, 0.0, 0.0)


@pytest.fixture(scope="session")
def skeleton():
    return default_skeleton()


@pytest.fixture(scope="session")
def radar():
    return RadarParams.from_config({})


@pytest.fixture(scope="session")
def grid():
    """Default 32 x 25 x 17 grid; 3 m, 0 m/s and 0 rad sit at bin centers."""
    return HeatmapGrid.from_config({})


@pytest.fixture(scope="session")
def small_grid():
    """16 x 9 x 9 grid; 3 m (bin 7), 0 m/s (bin 4) and 0 rad (bin 4) sit at bin centers."""
    return HeatmapGrid(
        range_bins=16, doppler_bins=9, angle_bins=9,
        range_res_m=0.1, doppler_res_mps=0.25, angle_res_rad=0.08,
        range_min_m=2.25, doppler_min_mps=-1.125, angle_min_rad=-0.36,
    )


@pytest.fixture(scope="session")
def kernel():
    return RenderKernelParams()


@pytest.fixture(scope="session")
def init_config():
    return InitConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def config_file(tmp_path):
    """Write a config overlay to tmp_path and return its path."""
    import yaml

    def write(document, name="config.yaml"):
        path = tmp_path / name
        with open(path, "w") as f:
            yaml.safe_dump(document, f)
        return path

    return write
