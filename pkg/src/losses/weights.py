"""
Loss Weights
Balancing weights of the reconstruction and kinesiological terms.
"""

from dataclasses import dataclass, fields
from typing import Dict

from src.core.config import require_fraction, require_positive, section
from src.core.exceptions import ConfigError

SOFT_IOU_VARIANTS = ("tanimoto", "product")


@dataclass(frozen=True)
class LossWeights:
    """
    lambda1 balances bone vs velocity terms, lambda2 balances reconstruction
    vs kinematics; top_fraction is the share of cells kept by each mask.
    """

    lambda1: float = 0.5
    lambda2: float = 0.3
    top_fraction: float = 0.1
    softness_tau: float = 0.1
    soft_iou: str = "tanimoto"

    def __post_init__(self):
        object.__setattr__(self, "lambda1", require_fraction("lambda1", self.lambda1, allow_zero=True))
        object.__setattr__(self, "lambda2", require_fraction("lambda2", self.lambda2, allow_zero=True))
        object.__setattr__(self, "top_fraction", require_fraction("top_fraction", self.top_fraction))
        object.__setattr__(self, "softness_tau", require_positive("softness_tau", self.softness_tau))
        if self.soft_iou not in SOFT_IOU_VARIANTS:
            raise ConfigError(f"soft_iou must be one of {SOFT_IOU_VARIANTS}, got {self.soft_iou!r}")

    @classmethod
    def from_config(cls, config: Dict) -> "LossWeights":
        losses = section(config, "losses")
        defaults = cls()
        return cls(**{f.name: losses.get(f.name, getattr(defaults, f.name)) for f in fields(cls)})

    def with_overrides(self, **overrides) -> "LossWeights":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(overrides)
        return LossWeights(**values)

    def to_dict(self) -> Dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
