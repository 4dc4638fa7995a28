"""
Shared domain types, file formats and configuration helpers.
"""

from .exceptions import (
    MGSError, ConfigError, DomainError, ShapeError, HeatmapFormatError,
    HeatmapWriteError, RenderError, FitError, SceneError, MetricError, OracleError,
)
from .types import SPEED_OF_LIGHT, RadarParams, HeatmapGrid, Heatmap, Skeleton, PointCloud
from .heatmap_io import heatmap_write, heatmap_read
from .skeleton import default_skeleton, load_skeleton
from .config import load_config, merge_config, save_yaml, configure_logging

__all__ = [
    "MGSError", "ConfigError", "DomainError", "ShapeError", "HeatmapFormatError",
    "HeatmapWriteError", "RenderError", "FitError", "SceneError", "MetricError", "OracleError",
    "SPEED_OF_LIGHT", "RadarParams", "HeatmapGrid", "Heatmap", "Skeleton", "PointCloud",
    "heatmap_write", "heatmap_read", "default_skeleton", "load_skeleton",
    "load_config", "merge_config", "save_yaml", "configure_logging",
]
