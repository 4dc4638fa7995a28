"""
Coarse State Extraction
Turns a heatmap into weighted coarse positions and velocities for
initialization, without a hard detection threshold.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from src.core.exceptions import DomainError, ShapeError
from src.core.types import Heatmap
from .transforms import spherical_to_cartesian_batch


@dataclass(frozen=True, eq=False)
class CoarseState:
    """Weighted coarse positions (K,3) and velocities (K,3)."""

    positions_m: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    velocities_mps: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        positions = np.reshape(np.array(self.positions_m, dtype=np.float64), (-1, 3))
        velocities = np.reshape(np.array(self.velocities_mps, dtype=np.float64), (-1, 3))
        weights = np.ravel(np.array(self.weights, dtype=np.float64))
        if not (len(positions) == len(velocities) == len(weights)):
            raise ShapeError("CoarseState positions, velocities and weights must have equal length")
        if np.any(weights < 0):
            raise DomainError("CoarseState weights must be non-negative")
        for array in (positions, velocities, weights):
            array.setflags(write=False)
        object.__setattr__(self, "positions_m", positions)
        object.__setattr__(self, "velocities_mps", velocities)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def is_empty(self) -> bool:
        return len(self.weights) == 0


def top_cells(values: np.ndarray, count: int) -> np.ndarray:
    """
    Flat indices of the `count` largest values, largest first.
    Ties keep the lower flat index first.
    """
    order = np.argsort(-values.ravel(), kind="stable")
    return order[:count]


def extract_coarse(
    h: Heatmap,
    top_fraction: float,
    radial_velocity_override: Optional[np.ndarray] = None,
    ablate_position: bool = False,
    ablate_velocity: bool = False,
) -> CoarseState:
    """
    Select the strongest heatmap cells and map them to Cartesian space.

    Args:
        h: Observed heatmap
        top_fraction: Fraction of cells to keep, in (0, 1]
        radial_velocity_override: Optional (R, A) radial-velocity grid used
            instead of the Doppler axis (heatmaps without velocity)
        ablate_position: Drop the position estimate (positions left empty)
        ablate_velocity: Replace the velocity estimate with zeros

    Returns:
        CoarseState with one entry per selected nonzero cell
    """
    if not (0 < top_fraction <= 1):
        raise DomainError(f"top_fraction must be in (0, 1], got {top_fraction}")

    grid = h.grid
    count = math.ceil(top_fraction * grid.size)
    flat = top_cells(h.values, count)
    flat = flat[h.values.ravel()[flat] > 0]
    if len(flat) == 0:
        logger.debug("extract_coarse: heatmap has no positive cells")
        return CoarseState()

    k, m, n = np.unravel_index(flat, grid.shape)
    ranges = grid.center_of("range", k)
    azimuths = grid.center_of("angle", n)
    elevations = np.zeros_like(azimuths)
    positions = spherical_to_cartesian_batch(ranges, azimuths, elevations)

    if radial_velocity_override is not None:
        override = np.asarray(radial_velocity_override, dtype=np.float64)
        if override.shape != (grid.range_bins, grid.angle_bins):
            raise ShapeError(
                f"radial_velocity_override must have shape {(grid.range_bins, grid.angle_bins)}, got {override.shape}"
            )
        doppler = override[k, n]
    else:
        doppler = grid.center_of("doppler", m)

    # Doppler reads the line-of-sight component; undo the angular projection
    v_r = doppler / (np.cos(azimuths) * np.cos(elevations))
    velocities = np.stack([v_r * np.cos(azimuths), v_r * np.sin(azimuths), v_r * np.sin(elevations)], axis=-1)
    weights = h.values.ravel()[flat]

    if ablate_velocity:
        velocities = np.zeros_like(velocities)
    if ablate_position:
        return CoarseState(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0))

    return CoarseState(positions, velocities, weights)


def temporal_velocity(prev: Heatmap, curr: Heatmap, dt: float) -> np.ndarray:
    """
    Frame-to-frame intensity rate on the range-angle marginal.

    Returns:
        (R, A) array of (sum_doppler(curr) - sum_doppler(prev)) / dt
    """
    prev.require_same_grid(curr)
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    return (curr.values.sum(axis=1) - prev.values.sum(axis=1)) / dt


def flow_radial_velocity(prev: Heatmap, curr: Heatmap, dt: float, eps: float = 1e-12) -> np.ndarray:
    """
    Radial velocity from spatial-temporal intensity variation.

    Brightness constancy along range gives I_t + v_r * I_r = 0 on the
    range-angle marginal; solved per cell as v_r = -I_t I_r / (I_r^2 + eps)
    with I_r taken from the mean of both frames.

    Returns:
        (R, A) radial velocity estimate in m/s
    """
    rate = temporal_velocity(prev, curr, dt)
    mean_marginal = 0.5 * (prev.values.sum(axis=1) + curr.values.sum(axis=1))
    if prev.grid.range_bins < 2:
        return np.zeros_like(rate)
    spatial = np.gradient(mean_marginal, prev.grid.range_res_m, axis=0)
    return -rate * spatial / (spatial * spatial + eps)
