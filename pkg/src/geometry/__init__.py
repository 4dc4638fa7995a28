"""
Heatmap/Cartesian transforms and coarse state extraction.
"""

from .transforms import (
    spherical_to_cartesian, cartesian_to_spherical, radial_velocity, spherical_to_cartesian_batch,
)
from .extraction import CoarseState, extract_coarse, temporal_velocity, flow_radial_velocity, top_cells

__all__ = [
    "spherical_to_cartesian", "cartesian_to_spherical", "radial_velocity",
    "spherical_to_cartesian_batch", "CoarseState", "extract_coarse",
    "temporal_velocity", "flow_radial_velocity", "top_cells",
]
