"""
Scene Specifications and Motion Programs
Analytic joint trajectories for synthetic scenes.
"""

import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from src.core.config import load_config, require_fraction, require_positive
from src.core.exceptions import ConfigError
from src.core.types import Skeleton

MOTIONS = ("static_tpose", "arm_swing", "walk")
VERTICAL = np.array([0.0, 0.0, 1.0])
LATERAL = np.array([0.0, 1.0, 0.0])

ARM_CHAINS = (("left_shoulder", "left_elbow", "left_wrist"), ("right_shoulder", "right_elbow", "right_wrist"))
LEG_CHAINS = (("left_hip", "left_knee", "left_ankle"), ("right_hip", "right_knee", "right_ankle"))


@dataclass(frozen=True)
class SceneSpec:
    """
    Synthetic scene: a motion program, clutter and noise.

    Motion parameters not used by the chosen program are ignored.
    """

    motion: str = "static_tpose"
    amplitude_m: float = 0.3
    period_s: float = 2.0
    speed_mps: float = 1.0
    stride_period_s: float = 1.0
    leg_swing_rad: float = 0.35
    arm_swing_rad: float = 0.3
    anchor_m: Tuple[float, float, float] = (3.0, 0.0, 0.0)
    frames: int = 1
    dt_s: float = 0.1
    clutter_points: int = 0
    clutter_intensity_rel: float = 0.5
    clutter_scale_m: float = 0.05
    clutter_elevation_rad: float = 0.3
    body_shell_m: float = 0.5
    ghost_range_ratio: float = 1.4
    noise_snr_db: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.motion not in MOTIONS:
            raise ConfigError(f"motion must be one of {MOTIONS}, got {self.motion!r}")
        anchor = tuple(float(c) for c in self.anchor_m)
        if len(anchor) != 3:
            raise ConfigError(f"anchor_m must have 3 components, got {self.anchor_m}")
        object.__setattr__(self, "anchor_m", anchor)
        for name in ("frames", "clutter_points", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.frames < 1:
            raise ConfigError(f"frames must be >= 1, got {self.frames}")
        if self.clutter_points < 0:
            raise ConfigError(f"clutter_points must be >= 0, got {self.clutter_points}")
        for name in ("period_s", "stride_period_s", "dt_s", "clutter_scale_m", "ghost_range_ratio"):
            object.__setattr__(self, name, require_positive(name, getattr(self, name)))
        for name in ("amplitude_m", "speed_mps", "leg_swing_rad", "arm_swing_rad",
                     "clutter_elevation_rad", "body_shell_m"):
            value = float(getattr(self, name))
            if value < 0:
                raise ConfigError(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "clutter_intensity_rel",
                           require_fraction("clutter_intensity_rel", self.clutter_intensity_rel, allow_zero=True))
        if self.noise_snr_db is not None:
            object.__setattr__(self, "noise_snr_db", float(self.noise_snr_db))

    @classmethod
    def from_config(cls, document: Dict) -> "SceneSpec":
        """
        Build from a scene document.

        `motion` may be a name or a mapping with `name` plus motion parameters.
        """
        values = dict(document.get("scene", document) or {})
        motion = values.get("motion", "static_tpose")
        if isinstance(motion, dict):
            motion = dict(motion)
            name = motion.pop("name", None)
            if name is None:
                raise ConfigError("motion.name is required")
            values.update(motion)
            values["motion"] = name
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"Unknown scene settings: {sorted(unknown)}")
        return cls(**values)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SceneSpec":
        return cls.from_config(load_config(path))

    def to_dict(self) -> Dict:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values["anchor_m"] = list(self.anchor_m)
        return values


def _rotate_chain(positions: np.ndarray, indices, pivot: np.ndarray, axis: np.ndarray, angle: float):
    rotation = Rotation.from_rotvec(axis * angle)
    positions[indices] = rotation.apply(positions[indices] - pivot) + pivot


def _chain_indices(sk: Skeleton, chain) -> list:
    try:
        return [sk.index(name) for name in chain]
    except ValueError as e:
        raise ConfigError(f"Motion program needs joint {e}")


def arm_length(sk: Skeleton, chain=ARM_CHAINS[0]) -> float:
    shoulder, _, wrist = _chain_indices(sk, chain)
    return float(np.linalg.norm(sk.tpose_positions_m[wrist] - sk.tpose_positions_m[shoulder]))


def pose_at(spec: SceneSpec, sk: Skeleton, t: float) -> np.ndarray:
    """
    Joint positions (J, 3) at time t.

    arm_swing turns each straight arm about the vertical axis through its
    shoulder by (amplitude / arm length) * sin(2 pi t / period), arms in
    antiphase, so the wrist speed peaks at amplitude * 2 pi / period. walk
    translates the body toward the radar and swings legs and arms about
    their roots.
    """
    offsets = sk.tpose_positions_m - sk.tpose_positions_m[sk.root_index]
    anchor = np.asarray(spec.anchor_m)
    positions = anchor + offsets

    if spec.motion == "arm_swing":
        omega = 2 * math.pi / spec.period_s
        for sign, chain in zip((1.0, -1.0), ARM_CHAINS):
            idx = _chain_indices(sk, chain)
            angle = sign * (spec.amplitude_m / arm_length(sk, chain)) * math.sin(omega * t)
            _rotate_chain(positions, idx, positions[idx[0]].copy(), VERTICAL, angle)

    elif spec.motion == "walk":
        positions = positions + np.array([-spec.speed_mps * t, 0.0, 0.0])
        phase = math.sin(2 * math.pi * t / spec.stride_period_s)
        for sign, chain in zip((1.0, -1.0), LEG_CHAINS):
            idx = _chain_indices(sk, chain)
            _rotate_chain(positions, idx, positions[idx[0]].copy(), LATERAL, sign * spec.leg_swing_rad * phase)
        for sign, chain in zip((-1.0, 1.0), ARM_CHAINS):
            idx = _chain_indices(sk, chain)
            _rotate_chain(positions, idx, positions[idx[0]].copy(), VERTICAL, sign * spec.arm_swing_rad * phase)

    return positions


def trajectory(spec: SceneSpec, sk: Skeleton) -> Tuple[np.ndarray, np.ndarray]:
    """
    Poses (T, J, 3) and velocities (T, J, 3) sampled every dt_s.

    Velocities are central differences of the poses at interior frames and
    one-sided at the ends; a single-frame scene uses a central difference
    of the motion program around t = 0.
    """
    times = np.arange(spec.frames) * spec.dt_s
    poses = np.stack([pose_at(spec, sk, t) for t in times])
    if spec.frames >= 2:
        velocities = np.gradient(poses, spec.dt_s, axis=0)
    else:
        ahead, behind = pose_at(spec, sk, spec.dt_s), pose_at(spec, sk, -spec.dt_s)
        velocities = ((ahead - behind) / (2 * spec.dt_s))[None]
    return poses, velocities
