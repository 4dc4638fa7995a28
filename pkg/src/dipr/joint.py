"""
Gaussian Joint Primitives
Six-parameter joints (position, scale, rotation, velocity, opacity,
Doppler features), covariance assembly and signal disturbance.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.exceptions import ConfigError, DomainError, ShapeError
from src.core.types import Skeleton
from .params import FrameParams

UNIT_TOLERANCE = 1e-9
DEFAULT_DOPPLER_BINS = 16
DEFAULT_DOPPLER_SIGMA_BINS = 2.0


def doppler_envelope(n_bins: int = DEFAULT_DOPPLER_BINS, sigma_bins: float = DEFAULT_DOPPLER_SIGMA_BINS) -> np.ndarray:
    """Discretized Gaussian over n_bins centered on bin n_bins // 2, summing to 1."""
    if n_bins < 2:
        raise ConfigError(f"doppler_bins must be >= 2, got {n_bins}")
    offsets = np.arange(n_bins) - n_bins // 2
    envelope = np.exp(-0.5 * (offsets / sigma_bins) ** 2)
    return envelope / envelope.sum()


def quaternion_to_rotation(q) -> np.ndarray:
    """
    Rotation matrix of a unit quaternion (w, x, y, z).

    Raises:
        DomainError: If |q| differs from 1 by more than 1e-9
    """
    w, x, y, z = np.asarray(q, dtype=np.float64)
    norm = np.sqrt(w * w + x * x + y * y + z * z)
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise DomainError(f"Quaternion must have unit norm, got {norm}")
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


@dataclass(frozen=True, eq=False)
class GaussianJoint:
    """One Gaussian joint. The rotation is renormalized on construction."""

    position_m: np.ndarray
    scale_m: np.ndarray
    rotation: np.ndarray
    velocity_mps: np.ndarray
    opacity: float
    doppler_features: np.ndarray

    def __post_init__(self):
        position = _vector(self.position_m, 3, "position_m")
        scale = _vector(self.scale_m, 3, "scale_m")
        velocity = _vector(self.velocity_mps, 3, "velocity_mps")
        rotation = _vector(self.rotation, 4, "rotation")
        features = np.array(self.doppler_features, dtype=np.float64).ravel()

        if np.any(scale <= 0):
            raise DomainError(f"Scale components must be positive, got {scale}")
        norm = np.linalg.norm(rotation)
        if norm == 0:
            raise DomainError("Rotation quaternion must be nonzero")
        rotation = rotation / norm
        if not self.opacity >= 0:
            raise DomainError(f"Opacity must be non-negative, got {self.opacity}")
        if np.any(features < 0) or abs(features.sum() - 1.0) > UNIT_TOLERANCE:
            raise DomainError("doppler_features must be non-negative and sum to 1")

        for name, array in (("position_m", position), ("scale_m", scale), ("rotation", rotation),
                            ("velocity_mps", velocity), ("doppler_features", features)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "opacity", float(self.opacity))

    @property
    def doppler_bins(self) -> int:
        return len(self.doppler_features)


def _vector(values, length: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64).ravel()
    if array.shape != (length,):
        raise ShapeError(f"{name} must have {length} components, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DomainError(f"{name} must be finite")
    return array


def covariance(j: GaussianJoint) -> np.ndarray:
    """Sigma = R S S^T R^T with S = diag(scale)."""
    rotation = quaternion_to_rotation(j.rotation)
    rs = rotation * j.scale_m
    return rs @ rs.T


def gaussian_density(j: GaussianJoint, x) -> float:
    """Unnormalized density exp(-1/2 (x-p)^T Sigma^-1 (x-p)), equal to 1 at p."""
    d = np.asarray(x, dtype=np.float64) - j.position_m
    # Sigma^-1 = R S^-2 R^T, so the quadratic form is |S^-1 R^T d|^2
    local = quaternion_to_rotation(j.rotation).T @ d / j.scale_m
    return float(np.exp(-0.5 * np.dot(local, local)))


def disturbance(j: GaussianJoint, x) -> complex:
    """
    Complex signal disturbance beta * G(x) * exp(i * mean(phi) * v.(x - p)).
    The Doppler features enter through their mean.
    """
    d = np.asarray(x, dtype=np.float64) - j.position_m
    phase = float(np.mean(j.doppler_features)) * float(np.dot(j.velocity_mps, d))
    return j.opacity * gaussian_density(j, x) * complex(np.cos(phase), np.sin(phase))


@dataclass(frozen=True)
class DiprFrame:
    """Gaussian joints index-aligned to a skeleton, at one timestamp."""

    joints: tuple
    timestamp_s: float = 0.0

    def __post_init__(self):
        joints = tuple(self.joints)
        if not joints:
            raise DomainError("A frame needs at least one joint")
        bins = {j.doppler_bins for j in joints}
        if len(bins) != 1:
            raise ShapeError(f"All joints must share one Doppler feature length, got {sorted(bins)}")
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "timestamp_s", float(self.timestamp_s))

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    def check_skeleton(self, skeleton: Skeleton):
        if self.num_joints != skeleton.num_joints:
            raise ShapeError(f"Frame has {self.num_joints} joints, skeleton has {skeleton.num_joints}")

    @property
    def positions(self) -> np.ndarray:
        return np.array([j.position_m for j in self.joints])

    @property
    def velocities(self) -> np.ndarray:
        return np.array([j.velocity_mps for j in self.joints])

    def to_params(self) -> FrameParams:
        return FrameParams(
            positions=[j.position_m for j in self.joints],
            scales=[j.scale_m for j in self.joints],
            rotations=[j.rotation for j in self.joints],
            velocities=[j.velocity_mps for j in self.joints],
            opacities=[j.opacity for j in self.joints],
            doppler_features=[j.doppler_features for j in self.joints],
        )

    @classmethod
    def from_params(cls, params: FrameParams, timestamp_s: float = 0.0) -> "DiprFrame":
        joints = [
            GaussianJoint(params.positions[i], params.scales[i], params.rotations[i],
                          params.velocities[i], params.opacities[i], params.doppler_features[i])
            for i in range(params.num_joints)
        ]
        return cls(tuple(joints), timestamp_s)

    @classmethod
    def from_positions(
        cls,
        positions,
        velocities=None,
        scales: Optional[Sequence[float]] = None,
        opacity: float = 1.0,
        doppler_bins: int = DEFAULT_DOPPLER_BINS,
        timestamp_s: float = 0.0,
    ) -> "DiprFrame":
        """Frame with identity rotations, isotropic scales and the default Doppler envelope."""
        positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
        n = len(positions)
        velocities = np.zeros((n, 3)) if velocities is None else np.asarray(velocities, dtype=np.float64).reshape(n, 3)
        scales = np.full(n, 0.08) if scales is None else np.asarray(scales, dtype=np.float64).reshape(n)
        envelope = doppler_envelope(doppler_bins)
        joints = [
            GaussianJoint(positions[i], np.full(3, scales[i]), [1.0, 0.0, 0.0, 0.0],
                          velocities[i], opacity, envelope)
            for i in range(n)
        ]
        return cls(tuple(joints), timestamp_s)
