"""
Fitter Configuration
Optimizer step sizes, stopping rules, projections and extraction settings.
"""

from dataclasses import dataclass, field, fields
from typing import Dict, Tuple

from src.core.config import require_fraction, require_positive, section
from src.core.exceptions import ConfigError
from src.losses.weights import LossWeights

# Optimizer parameter groups: FrameParams field -> FitConfig step-size field
LR_FIELDS = {
    "positions": "lr_position",
    "scales": "lr_scale",
    "rotations": "lr_rotation",
    "velocities": "lr_velocity",
    "opacities": "lr_opacity",
    "doppler_features": "lr_doppler",
}


@dataclass(frozen=True)
class ExtractionConfig:
    """Coarse-state extraction used to initialize a fit (section `extraction`)."""

    top_fraction: float = 0.01
    use_flow_velocity: bool = False
    ablate_position: bool = False
    ablate_velocity: bool = False

    def __post_init__(self):
        object.__setattr__(self, "top_fraction", require_fraction("extraction.top_fraction", self.top_fraction))

    @classmethod
    def from_config(cls, config: Dict) -> "ExtractionConfig":
        extraction = section(config, "extraction")
        defaults = cls()
        return cls(**{f.name: extraction.get(f.name, getattr(defaults, f.name)) for f in fields(cls)})


@dataclass(frozen=True)
class FitConfig:
    """Optimization settings (section `fit`; loss weights from `losses`)."""

    max_iters: int = 500
    lr_position: float = 1e-2
    lr_scale: float = 1e-3
    lr_rotation: float = 1e-2
    lr_velocity: float = 1e-2
    lr_opacity: float = 1e-2
    lr_doppler: float = 1e-2
    adaptive_beta1: float = 0.9
    adaptive_beta2: float = 0.999
    adaptive_eps: float = 1e-8
    convergence_tol: float = 1e-6
    patience: int = 10
    gradient_tol: float = 1e-10
    scale_min_m: float = 0.02
    scale_max_m: float = 0.5
    init_jitter_m: float = 0.0
    frame_interval_s: float = 0.1
    seed: int = 0
    # Coarse-to-fine: range/angle blur (bins) of each stage before the unblurred one
    blur_schedule_bins: Tuple[float, ...] = (2.0, 1.0)
    coarse_fraction: float = 0.5
    lr_decay: float = 0.5
    lr_patience: int = 5
    loss_weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self):
        for name in ("max_iters", "patience", "lr_patience"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"fit.{name} must be an integer >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        for name in list(LR_FIELDS.values()) + ["adaptive_eps", "convergence_tol", "scale_min_m",
                                                 "scale_max_m", "frame_interval_s"]:
            object.__setattr__(self, name, require_positive(f"fit.{name}", getattr(self, name)))
        for name in ("adaptive_beta1", "adaptive_beta2"):
            value = float(getattr(self, name))
            if not 0 <= value < 1:
                raise ConfigError(f"fit.{name} must be in [0, 1), got {value}")
            object.__setattr__(self, name, value)
        if self.scale_min_m > self.scale_max_m:
            raise ConfigError(f"fit.scale_min_m={self.scale_min_m} exceeds scale_max_m={self.scale_max_m}")
        if self.gradient_tol < 0 or self.init_jitter_m < 0:
            raise ConfigError("fit.gradient_tol and fit.init_jitter_m must be >= 0")
        object.__setattr__(self, "seed", int(self.seed))
        schedule = tuple(float(b) for b in self.blur_schedule_bins)
        if any(b <= 0 for b in schedule):
            raise ConfigError(f"fit.blur_schedule_bins must be positive, got {list(schedule)}")
        object.__setattr__(self, "blur_schedule_bins", schedule)
        if not 0 <= self.coarse_fraction < 1:
            raise ConfigError(f"fit.coarse_fraction must be in [0, 1), got {self.coarse_fraction}")
        if not 0 < self.lr_decay < 1:
            raise ConfigError(f"fit.lr_decay must be in (0, 1), got {self.lr_decay}")

    @classmethod
    def from_config(cls, config: Dict) -> "FitConfig":
        fit = section(config, "fit")
        known = {f.name for f in fields(cls)} - {"loss_weights"}
        unknown = set(fit) - known
        if unknown:
            raise ConfigError(f"Unknown fit settings: {sorted(unknown)}")
        return cls(loss_weights=LossWeights.from_config(config), **fit)

    def stage_budgets(self) -> Tuple[Tuple[float, int], ...]:
        """
        (blur_bins, iterations) per stage. Blurred stages share
        coarse_fraction of max_iters; the unblurred stage gets the rest
        and always runs.
        """
        stages = []
        if self.blur_schedule_bins:
            per_stage = int(self.max_iters * self.coarse_fraction) // len(self.blur_schedule_bins)
            stages = [(b, per_stage) for b in self.blur_schedule_bins if per_stage > 0]
        used = sum(n for _, n in stages)
        return tuple(stages) + ((0.0, self.max_iters - used),)

    def with_overrides(self, **overrides) -> "FitConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(overrides)
        return FitConfig(**values)

    def to_dict(self) -> Dict:
        values = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "loss_weights"}
        values["blur_schedule_bins"] = list(self.blur_schedule_bins)
        values["loss_weights"] = self.loss_weights.to_dict()
        return values
