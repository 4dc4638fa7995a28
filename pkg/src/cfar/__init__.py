"""
Cell-averaging CFAR detection and point cloud files.
"""

from .detector import CfarConfig, ca_cfar, brute_force_cfar_oracle
from .pointcloud_io import save_pointcloud, load_pointcloud

__all__ = ["CfarConfig", "ca_cfar", "brute_force_cfar_oracle", "save_pointcloud", "load_pointcloud"]
