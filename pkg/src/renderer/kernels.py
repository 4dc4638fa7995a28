"""
Rasterization Kernel Parameters
Widths and switches that map continuous Gaussians onto heatmap bins.
"""

from dataclasses import dataclass, fields
from typing import Dict

from src.core.config import require_positive, section
from src.core.exceptions import ConfigError

_FLAGS = (
    "coherent",
    "enable_signal_modulation",
    "enable_doppler_modulation",
    "enable_antenna_phase",
    "enable_path_loss",
)


@dataclass(frozen=True)
class RenderKernelParams:
    """
    Bin-space kernel widths (floors in bins) and forward-model switches.

    A disabled modulation contributes the constant factor 1.
    """

    range_sigma_floor_bins: float = 0.75
    doppler_sigma_floor_bins: float = 0.75
    angle_sigma_floor_bins: float = 0.75
    truncation_sigmas: float = 4.0
    r_min_m: float = 0.1
    coherent: bool = True
    enable_signal_modulation: bool = True
    enable_doppler_modulation: bool = True
    enable_antenna_phase: bool = True
    enable_path_loss: bool = True

    def __post_init__(self):
        for name in ("range_sigma_floor_bins", "doppler_sigma_floor_bins",
                     "angle_sigma_floor_bins", "truncation_sigmas", "r_min_m"):
            object.__setattr__(self, name, require_positive(name, getattr(self, name)))
        for name in _FLAGS:
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"render.{name} must be true or false, got {getattr(self, name)!r}")

    @classmethod
    def from_config(cls, config: Dict) -> "RenderKernelParams":
        render = section(config, "render")
        known = {f.name for f in fields(cls)}
        unknown = set(render) - known
        if unknown:
            raise ConfigError(f"Unknown render settings: {sorted(unknown)}")
        return cls(**render)

    def with_overrides(self, **overrides) -> "RenderKernelParams":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(overrides)
        return RenderKernelParams(**values)

    def to_dict(self) -> Dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
