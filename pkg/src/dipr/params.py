"""
Packed Frame Parameters
Array form of a set of Gaussian scatterers, used by the renderer, the
optimizer and as the per-parameter gradient set.
"""

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from src.core.exceptions import ShapeError

# Field order is the per-joint flattening order of a ParamVector
PARAM_FIELDS: Tuple[str, ...] = (
    "positions", "scales", "rotations", "velocities", "opacities", "doppler_features",
)


@dataclass
class FrameParams:
    """
    Unvalidated parameter arrays for N scatterers.

    positions (N,3) m, scales (N,3) m, rotations (N,4) quaternions (w,x,y,z),
    velocities (N,3) m/s, opacities (N,), doppler_features (N,N_d).
    """

    positions: np.ndarray
    scales: np.ndarray
    rotations: np.ndarray
    velocities: np.ndarray
    opacities: np.ndarray
    doppler_features: np.ndarray

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=np.float64).reshape(-1, 3)
        n = len(self.positions)
        self.scales = np.array(self.scales, dtype=np.float64).reshape(n, 3)
        self.rotations = np.array(self.rotations, dtype=np.float64).reshape(n, 4)
        self.velocities = np.array(self.velocities, dtype=np.float64).reshape(n, 3)
        self.opacities = np.array(self.opacities, dtype=np.float64).reshape(n)
        self.doppler_features = np.array(self.doppler_features, dtype=np.float64).reshape(n, -1)

    @property
    def num_joints(self) -> int:
        return len(self.positions)

    @property
    def doppler_bins(self) -> int:
        return self.doppler_features.shape[1]

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in PARAM_FIELDS:
            yield name, getattr(self, name)

    def copy(self) -> "FrameParams":
        return FrameParams(**{name: value.copy() for name, value in self.items()})

    def concat(self, other: "FrameParams") -> "FrameParams":
        """Stack two scatterer sets (same N_d)."""
        if other.doppler_bins != self.doppler_bins:
            raise ShapeError(f"Doppler feature lengths differ: {self.doppler_bins} vs {other.doppler_bins}")
        return FrameParams(**{
            name: np.concatenate([value, getattr(other, name)]) for name, value in self.items()
        })

