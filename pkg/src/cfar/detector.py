"""
Cell-Averaging CFAR
Adaptive-threshold detection over the (range, angle) plane of each Doppler
slice. Detections become a point cloud in radar coordinates.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from loguru import logger

from src.core.config import section
from src.core.exceptions import ConfigError
from src.core.types import Heatmap, PointCloud
from src.geometry.transforms import spherical_to_cartesian_batch

WINDOW_AXES = ("range", "angle")


def _per_axis(name: str, value) -> Tuple[int, int]:
    """Accept a single count or a {range, angle} mapping."""
    if isinstance(value, dict):
        unknown = set(value) - set(WINDOW_AXES)
        if unknown:
            raise ConfigError(f"cfar.{name} has unknown axes {sorted(unknown)}")
        counts = (value.get("range", 0), value.get("angle", 0))
    elif isinstance(value, (tuple, list)):
        if len(value) != 2:
            raise ConfigError(f"cfar.{name} needs (range, angle) counts, got {value}")
        counts = tuple(value)
    else:
        counts = (value, value)
    result = []
    for count in counts:
        if isinstance(count, bool) or int(count) != count or count < 0:
            raise ConfigError(f"cfar.{name} counts must be integers >= 0, got {count}")
        result.append(int(count))
    return tuple(result)


@dataclass(frozen=True)
class CfarConfig:
    """
    CA-CFAR window and false-alarm rate.

    guard_cells / train_cells are (range, angle) counts per side; an axis
    not listed in `axes` gets no window extent.
    """

    guard_cells: Tuple[int, int] = (2, 2)
    train_cells: Tuple[int, int] = (4, 4)
    pfa: float = 1e-3
    axes: Tuple[str, ...] = WINDOW_AXES

    def __post_init__(self):
        object.__setattr__(self, "guard_cells", _per_axis("guard_cells", self.guard_cells))
        object.__setattr__(self, "train_cells", _per_axis("train_cells", self.train_cells))
        axes = tuple(self.axes)
        if not axes or any(a not in WINDOW_AXES for a in axes) or len(set(axes)) != len(axes):
            raise ConfigError(f"cfar.axes must be a non-empty subset of {WINDOW_AXES}, got {self.axes}")
        object.__setattr__(self, "axes", axes)
        for axis in axes:
            if self.train_cells[WINDOW_AXES.index(axis)] < 1:
                raise ConfigError(f"cfar.train_cells must be >= 1 along {axis}")
        if not (0 < float(self.pfa) < 1):
            raise ConfigError(f"cfar.pfa must be in (0, 1), got {self.pfa}")
        object.__setattr__(self, "pfa", float(self.pfa))

    @classmethod
    def from_config(cls, config: Dict) -> "CfarConfig":
        cfar = section(config, "cfar")
        return cls(
            guard_cells=cfar.get("guard_cells", 2),
            train_cells=cfar.get("train_cells", 4),
            pfa=cfar.get("pfa", 1e-3),
            axes=tuple(cfar.get("axes", WINDOW_AXES)),
        )

    def half_widths(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """((guard_r, outer_r), (guard_a, outer_a)) with inactive axes zeroed."""
        widths = []
        for k, axis in enumerate(WINDOW_AXES):
            if axis in self.axes:
                guard = self.guard_cells[k]
                widths.append((guard, guard + self.train_cells[k]))
            else:
                widths.append((0, 0))
        return tuple(widths)

    def training_count(self) -> int:
        (g_r, w_r), (g_a, w_a) = self.half_widths()
        return (2 * w_r + 1) * (2 * w_a + 1) - (2 * g_r + 1) * (2 * g_a + 1)

    def scale_factor(self) -> float:
        """alpha = N (pfa^(-1/N) - 1)."""
        n = self.training_count()
        return n * (self.pfa ** (-1.0 / n) - 1.0)

    def to_dict(self) -> Dict:
        return {
            "guard_cells": {"range": self.guard_cells[0], "angle": self.guard_cells[1]},
            "train_cells": {"range": self.train_cells[0], "angle": self.train_cells[1]},
            "pfa": self.pfa,
            "axes": list(self.axes),
        }


def _check_window(h: Heatmap, cfg: CfarConfig):
    (_, w_r), (_, w_a) = cfg.half_widths()
    if 2 * w_r + 1 > h.grid.range_bins or 2 * w_a + 1 > h.grid.angle_bins:
        raise ConfigError(
            f"CFAR window {2 * w_r + 1}x{2 * w_a + 1} does not fit the "
            f"{h.grid.range_bins}x{h.grid.angle_bins} range-angle plane"
        )


def _points_from_mask(h: Heatmap, detected: np.ndarray) -> PointCloud:
    r_idx, v_idx, a_idx = np.nonzero(detected)
    if len(r_idx) == 0:
        return PointCloud()
    grid = h.grid
    positions = spherical_to_cartesian_batch(
        grid.center_of("range", r_idx), grid.center_of("angle", a_idx), 0.0
    )
    return PointCloud(
        positions_m=positions,
        radial_velocities_mps=grid.center_of("doppler", v_idx),
        intensities=h.values[r_idx, v_idx, a_idx],
    )


def _training_mask(cfg: CfarConfig) -> np.ndarray:
    """Boolean (2*outer_r+1, 2*outer_a+1) window selecting training cells."""
    (g_r, w_r), (g_a, w_a) = cfg.half_widths()
    mask = np.ones((2 * w_r + 1, 2 * w_a + 1), dtype=bool)
    mask[w_r - g_r:w_r + g_r + 1, w_a - g_a:w_a + g_a + 1] = False
    return mask


def ca_cfar(h: Heatmap, cfg: CfarConfig = CfarConfig()) -> PointCloud:
    """
    Detect cells exceeding alpha times their training-cell mean.

    Args:
        h: Heatmap to threshold
        cfg: Window and false-alarm settings

    Returns:
        PointCloud in ascending flat-index order

    Raises:
        ConfigError: If the window does not fit the grid
    """
    _check_window(h, cfg)
    (_, w_r), (_, w_a) = cfg.half_widths()
    values = h.values
    n_range, _, n_angle = values.shape
    mask = _training_mask(cfg)

    # (R', V, A', window_r, window_a)
    windows = sliding_window_view(values, mask.shape, axis=(0, 2))
    noise = np.maximum(windows[..., mask].sum(axis=-1) / cfg.training_count(), 0.0)

    cut = values[w_r:n_range - w_r, :, w_a:n_angle - w_a]
    detected = np.zeros(values.shape, dtype=bool)
    detected[w_r:n_range - w_r, :, w_a:n_angle - w_a] = cut > cfg.scale_factor() * noise

    cloud = _points_from_mask(h, detected)
    logger.debug(f"CA-CFAR: {len(cloud)} detections (N={cfg.training_count()}, alpha={cfg.scale_factor():.4f})")
    return cloud


def brute_force_cfar_oracle(h: Heatmap, cfg: CfarConfig = CfarConfig()) -> PointCloud:
    """Reference CA-CFAR enumerating every window directly."""
    _check_window(h, cfg)
    (g_r, w_r), (g_a, w_a) = cfg.half_widths()
    values = h.values
    n_range, n_doppler, n_angle = values.shape
    n_train = cfg.training_count()
    alpha = cfg.scale_factor()

    detected = np.zeros(values.shape, dtype=bool)
    for r in range(w_r, n_range - w_r):
        for m in range(n_doppler):
            for a in range(w_a, n_angle - w_a):
                total = 0.0
                for dr in range(-w_r, w_r + 1):
                    for da in range(-w_a, w_a + 1):
                        if abs(dr) <= g_r and abs(da) <= g_a:
                            continue
                        total += values[r + dr, m, a + da]
                detected[r, m, a] = values[r, m, a] > alpha * (total / n_train)
    return _points_from_mask(h, detected)
