"""
Frame Initialization
Places the T-pose at the coarse-state centroid and associates coarse
velocities with nearby joints.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np
from loguru import logger

from src.core.config import require_positive, section
from src.core.exceptions import ConfigError
from src.core.types import Skeleton
from src.geometry.extraction import CoarseState
from .joint import DEFAULT_DOPPLER_BINS, DEFAULT_DOPPLER_SIGMA_BINS, DiprFrame, GaussianJoint, doppler_envelope


@dataclass(frozen=True)
class InitConfig:
    """Initialization settings (config section `initialization`)."""

    association_radius_m: float = 0.3
    default_anchor_m: tuple = (3.0, 0.0, 0.0)
    doppler_bins: int = DEFAULT_DOPPLER_BINS
    doppler_sigma_bins: float = DEFAULT_DOPPLER_SIGMA_BINS
    opacity: float = 1.0

    @classmethod
    def from_config(cls, config: Dict) -> "InitConfig":
        init = section(config, "initialization")
        anchor = tuple(float(c) for c in init.get("default_anchor_m", cls.default_anchor_m))
        if len(anchor) != 3:
            raise ConfigError(f"initialization.default_anchor_m must have 3 components, got {anchor}")
        bins = init.get("doppler_bins", cls.doppler_bins)
        if int(bins) != bins or bins < 2:
            raise ConfigError(f"initialization.doppler_bins must be an integer >= 2, got {bins}")
        return cls(
            association_radius_m=require_positive("association_radius_m", init.get("association_radius_m", cls.association_radius_m)),
            default_anchor_m=anchor,
            doppler_bins=int(bins),
            doppler_sigma_bins=require_positive("doppler_sigma_bins", init.get("doppler_sigma_bins", cls.doppler_sigma_bins)),
            opacity=float(init.get("opacity", cls.opacity)),
        )


def tpose_frame(sk: Skeleton, anchor, velocities=None, cfg: InitConfig = InitConfig(), timestamp_s: float = 0.0) -> DiprFrame:
    """Rigid T-pose with the root joint at `anchor`."""
    offsets = sk.tpose_positions_m - sk.tpose_positions_m[sk.root_index]
    positions = np.asarray(anchor, dtype=np.float64) + offsets
    if velocities is None:
        velocities = np.zeros_like(positions)
    envelope = doppler_envelope(cfg.doppler_bins, cfg.doppler_sigma_bins)
    joints = [
        GaussianJoint(positions[i], np.full(3, sk.default_scales_m[i]), [1.0, 0.0, 0.0, 0.0],
                      velocities[i], cfg.opacity, envelope)
        for i in range(sk.num_joints)
    ]
    return DiprFrame(tuple(joints), timestamp_s)


def init_from_coarse(sk: Skeleton, cs: CoarseState, cfg: InitConfig = InitConfig(), timestamp_s: float = 0.0) -> DiprFrame:
    """
    Initialize a frame from extracted coarse state.

    The root joint goes to the intensity-weighted centroid of the coarse
    positions and the other joints keep their T-pose offsets. Each joint's
    velocity is the weighted mean velocity of coarse entries within the
    association radius; joints with no entry in reach take the global
    weighted mean velocity.

    Args:
        sk: Skeleton providing the T-pose
        cs: Coarse state (may be empty)
        cfg: Initialization settings

    Returns:
        DiprFrame aligned to sk
    """
    total_weight = float(cs.weights.sum()) if not cs.is_empty else 0.0
    if cs.is_empty or total_weight <= 0:
        logger.warning(f"Empty coarse state; anchoring T-pose at default {cfg.default_anchor_m}")
        return tpose_frame(sk, cfg.default_anchor_m, cfg=cfg, timestamp_s=timestamp_s)

    weights = cs.weights
    anchor = weights @ cs.positions_m / total_weight
    global_velocity = weights @ cs.velocities_mps / total_weight

    offsets = sk.tpose_positions_m - sk.tpose_positions_m[sk.root_index]
    positions = anchor + offsets
    velocities = np.empty_like(positions)
    for i, p in enumerate(positions):
        near = np.linalg.norm(cs.positions_m - p, axis=1) <= cfg.association_radius_m
        near_weight = weights[near].sum()
        if near_weight > 0:
            velocities[i] = weights[near] @ cs.velocities_mps[near] / near_weight
        else:
            velocities[i] = global_velocity

    logger.debug(f"Initialized frame at anchor {np.round(anchor, 3).tolist()} from {len(cs)} coarse entries")
    return tpose_frame(sk, anchor, velocities, cfg, timestamp_s)
