"""
Coordinate Transforms
Radar is at the world origin looking along +x; y is left, z is up.
Azimuth is measured in the x-y plane from +x, elevation from that plane.
"""

import math
from typing import Tuple

import numpy as np

from src.core.exceptions import DomainError

HALF_PI = math.pi / 2


def spherical_to_cartesian(r: float, az: float, el: float) -> np.ndarray:
    """
    Convert range/azimuth/elevation to a Cartesian point.

    Args:
        r: Range in meters (>= 0)
        az: Azimuth in radians, |az| < pi/2
        el: Elevation in radians, |el| < pi/2

    Returns:
        (r cos el cos az, r cos el sin az, r sin el)
    """
    if r < 0:
        raise DomainError(f"Range must be non-negative, got {r}")
    if not (abs(az) < HALF_PI and abs(el) < HALF_PI):
        raise DomainError(f"Angles must lie in (-pi/2, pi/2), got az={az}, el={el}")
    cos_el = math.cos(el)
    return np.array([r * cos_el * math.cos(az), r * cos_el * math.sin(az), r * math.sin(el)])


def cartesian_to_spherical(p) -> Tuple[float, float, float]:
    """
    Inverse of spherical_to_cartesian for points in front of the radar.

    Raises:
        DomainError: If p_x <= 0
    """
    x, y, z = (float(c) for c in p)
    if not x > 0:
        raise DomainError(f"Point must lie in front of the radar (p_x > 0), got p_x={x}")
    horizontal = math.hypot(x, y)
    r = math.sqrt(horizontal * horizontal + z * z)
    return r, math.atan2(y, x), math.atan2(z, horizontal)


def radial_velocity(p, v) -> float:
    """Component of v along the line of sight p / |p|."""
    p = np.asarray(p, dtype=np.float64)
    norm = np.linalg.norm(p)
    if norm == 0:
        raise DomainError("Radial velocity undefined at the radar origin")
    return float(np.dot(v, p) / norm)


def spherical_to_cartesian_batch(r, az, el) -> np.ndarray:
    """Vectorized spherical_to_cartesian; returns (..., 3)."""
    r, az, el = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (r, az, el)))
    if np.any(r < 0) or np.any(np.abs(az) >= HALF_PI) or np.any(np.abs(el) >= HALF_PI):
        raise DomainError("Range must be >= 0 and angles inside (-pi/2, pi/2)")
    cos_el = np.cos(el)
    return np.stack([r * cos_el * np.cos(az), r * cos_el * np.sin(az), r * np.sin(el)], axis=-1)
