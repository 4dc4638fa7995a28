"""
Point Cloud Text Files
One detection per line: `x y z v_r intensity`, 9 significant digits.
"""

from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from src.core.exceptions import HeatmapFormatError
from src.core.types import PointCloud

ROW_FORMAT = "%.9g"


def save_pointcloud(cloud: PointCloud, path: Union[str, Path]):
    path = Path(path)
    with open(path, 'w') as f:
        if len(cloud):
            np.savetxt(f, cloud.as_rows(), fmt=ROW_FORMAT, delimiter=" ")
    logger.info(f"Wrote {len(cloud)} detections to {path}")


def load_pointcloud(path: Union[str, Path]) -> PointCloud:
    """
    Read a point cloud text file.

    Raises:
        HeatmapFormatError: If a line does not hold five numbers
    """
    path = Path(path)
    text = path.read_text()
    if not text.strip():
        return PointCloud()
    try:
        rows = np.loadtxt(path, ndmin=2)
    except ValueError as e:
        raise HeatmapFormatError(f"{path} is not a point cloud file: {e}")
    if rows.shape[1] != 5:
        raise HeatmapFormatError(f"{path}: expected 5 columns, got {rows.shape[1]}")
    return PointCloud(rows[:, :3], rows[:, 3], rows[:, 4])
