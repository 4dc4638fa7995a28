"""
Core Domain Types
Radar configuration, heatmap grid, skeleton and point cloud value types.
All types are immutable after construction; array fields are read-only.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import require_positive, section
from .exceptions import ConfigError, DomainError, ShapeError

SPEED_OF_LIGHT = 299792458.0


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class RadarParams:
    """FMCW radar configuration. All lengths in meters, times in seconds."""

    wavelength_m: float
    bandwidth_hz: float
    chirp_duration_s: float
    antenna_spacing_az_m: float
    antenna_spacing_el_m: float
    carrier_freq_hz: float

    def __post_init__(self):
        for name in ("wavelength_m", "bandwidth_hz", "chirp_duration_s",
                     "antenna_spacing_az_m", "antenna_spacing_el_m", "carrier_freq_hz"):
            require_positive(name, getattr(self, name))
        expected = SPEED_OF_LIGHT / self.carrier_freq_hz
        if abs(self.wavelength_m - expected) > 1e-9 * expected:
            raise ConfigError(
                f"wavelength_m={self.wavelength_m} inconsistent with "
                f"carrier_freq_hz={self.carrier_freq_hz} (expected {expected})"
            )

    @property
    def chirp_slope(self) -> float:
        """Chirp slope S = B / T_c in Hz/s."""
        return self.bandwidth_hz / self.chirp_duration_s

    @classmethod
    def from_config(cls, config: Dict) -> "RadarParams":
        """Build from the `radar` section; wavelength defaults to c / carrier."""
        radar = section(config, "radar")
        carrier = require_positive("carrier_freq_hz", radar.get("carrier_freq_hz", 77e9))
        wavelength = radar.get("wavelength_m", SPEED_OF_LIGHT / carrier)
        return cls(
            wavelength_m=float(wavelength),
            bandwidth_hz=float(radar.get("bandwidth_hz", 4e9)),
            chirp_duration_s=float(radar.get("chirp_duration_s", 60e-6)),
            antenna_spacing_az_m=float(radar.get("antenna_spacing_az_m", wavelength / 2)),
            antenna_spacing_el_m=float(radar.get("antenna_spacing_el_m", wavelength / 2)),
            carrier_freq_hz=carrier,
        )

    def to_dict(self) -> Dict:
        return {
            "wavelength_m": self.wavelength_m,
            "bandwidth_hz": self.bandwidth_hz,
            "chirp_duration_s": self.chirp_duration_s,
            "antenna_spacing_az_m": self.antenna_spacing_az_m,
            "antenna_spacing_el_m": self.antenna_spacing_el_m,
            "carrier_freq_hz": self.carrier_freq_hz,
        }


@dataclass(frozen=True)
class HeatmapGrid:
    """
    Axis metadata of a range x Doppler x angle heatmap.

    Bin k of an axis covers [origin + k*res, origin + (k+1)*res) and its
    center is origin + (k + 0.5)*res.
    """

    range_bins: int
    doppler_bins: int
    angle_bins: int
    range_res_m: float
    doppler_res_mps: float
    angle_res_rad: float
    range_min_m: float
    doppler_min_mps: float
    angle_min_rad: float

    AXES = ("range", "doppler", "angle")

    def __post_init__(self):
        for name in ("range_bins", "doppler_bins", "angle_bins"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        for name in ("range_res_m", "doppler_res_mps", "angle_res_rad"):
            object.__setattr__(self, name, require_positive(name, getattr(self, name)))
        for name in ("range_min_m", "doppler_min_mps", "angle_min_rad"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.range_bins, self.doppler_bins, self.angle_bins)

    @property
    def size(self) -> int:
        return self.range_bins * self.doppler_bins * self.angle_bins

    def _axis(self, axis: str) -> Tuple[int, float, float]:
        if axis == "range":
            return self.range_bins, self.range_res_m, self.range_min_m
        if axis == "doppler":
            return self.doppler_bins, self.doppler_res_mps, self.doppler_min_mps
        if axis == "angle":
            return self.angle_bins, self.angle_res_rad, self.angle_min_rad
        raise ValueError(f"Unknown axis: {axis}")

    def centers(self, axis: str) -> np.ndarray:
        """Bin centers of one axis."""
        bins, res, origin = self._axis(axis)
        return origin + (np.arange(bins) + 0.5) * res

    def center_of(self, axis: str, k) -> np.ndarray:
        bins, res, origin = self._axis(axis)
        return origin + (np.asarray(k) + 0.5) * res

    def bin_of(self, axis: str, value) -> np.ndarray:
        """Index of the bin containing value (may fall outside [0, bins))."""
        bins, res, origin = self._axis(axis)
        return np.floor((np.asarray(value, dtype=np.float64) - origin) / res).astype(np.int64)

    def coverage(self, axis: str) -> Tuple[float, float]:
        """Half-open interval [low, high) covered by an axis."""
        bins, res, origin = self._axis(axis)
        return origin, origin + bins * res

    def covers(self, axis: str, value: float) -> bool:
        low, high = self.coverage(axis)
        return low <= value < high

    @classmethod
    def from_config(cls, config: Dict) -> "HeatmapGrid":
        grid = section(config, "grid")
        defaults = cls.default_fields()
        return cls(**{name: grid.get(name, default) for name, default in defaults.items()})

    @staticmethod
    def default_fields() -> Dict:
        return {
            "range_bins": 32, "doppler_bins": 25, "angle_bins": 17,
            "range_res_m": 0.05, "doppler_res_mps": 0.125, "angle_res_rad": 0.04,
            "range_min_m": 2.175, "doppler_min_mps": -1.5625, "angle_min_rad": -0.34,
        }

    def to_dict(self) -> Dict:
        return {name: getattr(self, name) for name in self.default_fields()}


@dataclass(frozen=True, eq=False)
class Heatmap:
    """Non-negative intensity grid; values are float64 of shape grid.shape."""

    grid: HeatmapGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ShapeError(f"Heatmap values have shape {values.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("Heatmap values must be finite")
        if np.any(values < 0):
            raise DomainError("Heatmap values must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: HeatmapGrid) -> "Heatmap":
        return cls(grid, np.zeros(grid.shape))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Heatmap):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.grid, self.values.tobytes()))

    def require_same_grid(self, other: "Heatmap"):
        if self.grid != other.grid:
            raise ShapeError(f"Heatmap grids differ: {self.grid} vs {other.grid}")


@dataclass(frozen=True, eq=False)
class Skeleton:
    """
    Joint tree with canonical T-pose.

    bone_lengths_m[e] is the T-pose distance across edges[e]; the edges must
    form a spanning tree over all joints.
    """

    joint_names: Tuple[str, ...]
    edges: Tuple[Tuple[int, int], ...]
    bone_lengths_m: np.ndarray
    tpose_positions_m: np.ndarray
    default_scales_m: Optional[np.ndarray] = None
    root: str = "pelvis"

    def __post_init__(self):
        names = tuple(str(n) for n in self.joint_names)
        n = len(names)
        if n < 2:
            raise ConfigError(f"Skeleton needs at least 2 joints, got {n}")
        if len(set(names)) != n:
            raise ConfigError("Skeleton joint names must be unique")
        if self.root not in names:
            raise ConfigError(f"Skeleton root '{self.root}' is not a joint")

        edges = tuple((int(i), int(j)) for i, j in self.edges)
        tpose = _frozen_array(self.tpose_positions_m)
        if tpose.shape != (n, 3):
            raise ConfigError(f"tpose_positions_m must have shape ({n}, 3), got {tpose.shape}")
        _check_spanning_tree(n, edges)

        lengths = _frozen_array(self.bone_lengths_m)
        if lengths.shape != (len(edges),):
            raise ConfigError(f"bone_lengths_m must have {len(edges)} entries, got {lengths.shape}")
        tpose_lengths = np.array([np.linalg.norm(tpose[i] - tpose[j]) for i, j in edges])
        worst = np.max(np.abs(tpose_lengths - lengths))
        if worst > 1e-6:
            raise ConfigError(f"bone_lengths_m disagree with T-pose distances by {worst:.3g} m")

        if self.default_scales_m is None:
            scales = _frozen_array(np.full(n, 0.08))
        else:
            scales = _frozen_array(self.default_scales_m)
            if scales.shape != (n,) or np.any(scales <= 0):
                raise ConfigError("default_scales_m must hold one positive scale per joint")

        object.__setattr__(self, "joint_names", names)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "tpose_positions_m", tpose)
        object.__setattr__(self, "bone_lengths_m", lengths)
        object.__setattr__(self, "default_scales_m", scales)

    @property
    def num_joints(self) -> int:
        return len(self.joint_names)

    @property
    def root_index(self) -> int:
        return self.joint_names.index(self.root)

    def index(self, name: str) -> int:
        return self.joint_names.index(name)

    @classmethod
    def from_tpose(
        cls,
        joint_names: Sequence[str],
        edges: Sequence[Tuple[int, int]],
        tpose_positions_m,
        default_scales_m=None,
        root: str = "pelvis",
    ) -> "Skeleton":
        """Build a skeleton whose bone lengths are measured on the T-pose."""
        tpose = np.asarray(tpose_positions_m, dtype=np.float64)
        lengths = [float(np.linalg.norm(tpose[i] - tpose[j])) for i, j in edges]
        return cls(tuple(joint_names), tuple(edges), lengths, tpose, default_scales_m, root)


def _check_spanning_tree(n: int, edges: Sequence[Tuple[int, int]]):
    if len(edges) != n - 1:
        raise ConfigError(f"Skeleton edges must form a tree: {n} joints need {n - 1} edges, got {len(edges)}")
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ConfigError(f"Invalid skeleton edge ({i}, {j})")
        ri, rj = find(i), find(j)
        if ri == rj:
            raise ConfigError(f"Skeleton edge ({i}, {j}) closes a cycle")
        parent[ri] = rj


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Detections: positions (K,3) m, radial velocities (K,) m/s, intensities (K,)."""

    positions_m: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    radial_velocities_mps: np.ndarray = field(default_factory=lambda: np.zeros(0))
    intensities: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        positions = _frozen_array(np.reshape(self.positions_m, (-1, 3)))
        velocities = _frozen_array(np.ravel(self.radial_velocities_mps))
        intensities = _frozen_array(np.ravel(self.intensities))
        if not (len(positions) == len(velocities) == len(intensities)):
            raise ShapeError("PointCloud fields must have equal length")
        if np.any(intensities < 0):
            raise DomainError("PointCloud intensities must be non-negative")
        object.__setattr__(self, "positions_m", positions)
        object.__setattr__(self, "radial_velocities_mps", velocities)
        object.__setattr__(self, "intensities", intensities)

    def __len__(self) -> int:
        return len(self.intensities)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (np.array_equal(self.positions_m, other.positions_m)
                and np.array_equal(self.radial_velocities_mps, other.radial_velocities_mps)
                and np.array_equal(self.intensities, other.intensities))

    def as_rows(self) -> np.ndarray:
        """(K, 5) array of x, y, z, v_r, intensity."""
        return np.column_stack([self.positions_m, self.radial_velocities_mps, self.intensities])

    @property
    def points(self) -> List[Dict]:
        return [
            {"position_m": p.tolist(), "radial_velocity_mps": float(v), "intensity": float(i)}
            for p, v, i in zip(self.positions_m, self.radial_velocities_mps, self.intensities)
        ]
