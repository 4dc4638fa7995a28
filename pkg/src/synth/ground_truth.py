"""
Ground-Truth Sequences
Per-frame joint positions and velocities of a synthetic scene, stored as
a `gt.poses` YAML document.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from src.core.config import load_config, save_yaml
from src.core.exceptions import ConfigError, ShapeError
from src.core.types import Skeleton
from src.dipr.initialization import InitConfig
from src.dipr.joint import DiprFrame, GaussianJoint, doppler_envelope


@dataclass(frozen=True, eq=False)
class GroundTruthSequence:
    """poses and velocities have shape (T, J, 3)."""

    poses: np.ndarray
    velocities: np.ndarray
    dt_s: float
    joint_names: Sequence[str]

    def __post_init__(self):
        poses = np.asarray(self.poses, dtype=np.float64)
        velocities = np.asarray(self.velocities, dtype=np.float64)
        if poses.ndim != 3 or poses.shape[2] != 3 or velocities.shape != poses.shape:
            raise ShapeError(f"Ground truth needs matching (T, J, 3) arrays, got {poses.shape} and {velocities.shape}")
        if len(self.joint_names) != poses.shape[1]:
            raise ShapeError(f"{len(self.joint_names)} joint names for {poses.shape[1]} joints")
        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "velocities", velocities)
        object.__setattr__(self, "joint_names", tuple(self.joint_names))

    def __len__(self) -> int:
        return len(self.poses)

    def to_document(self) -> Dict:
        return {
            "dt_s": float(self.dt_s),
            "joint_names": list(self.joint_names),
            "frames": [
                {"positions_m": p.tolist(), "velocities_mps": v.tolist()}
                for p, v in zip(self.poses, self.velocities)
            ],
        }

    @classmethod
    def from_document(cls, document: Dict) -> "GroundTruthSequence":
        try:
            frames = document["frames"]
            poses = [f["positions_m"] for f in frames]
            velocities = [f.get("velocities_mps", np.zeros_like(f["positions_m"])) for f in frames]
            return cls(np.array(poses, dtype=np.float64), np.array(velocities, dtype=np.float64),
                       float(document["dt_s"]), document["joint_names"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed ground-truth document: {e}")


def save_ground_truth(seq: GroundTruthSequence, path: Union[str, Path]):
    save_yaml(seq.to_document(), path)


def load_ground_truth(path: Union[str, Path]) -> GroundTruthSequence:
    return GroundTruthSequence.from_document(load_config(path))


def ground_truth_frames(seq: GroundTruthSequence, sk: Skeleton, init_cfg: InitConfig = InitConfig()) -> List[DiprFrame]:
    """Frames built from ground truth with default scales, unit opacity and the default Doppler envelope."""
    if seq.poses.shape[1] != sk.num_joints:
        raise ShapeError(f"Ground truth has {seq.poses.shape[1]} joints, skeleton has {sk.num_joints}")
    envelope = doppler_envelope(init_cfg.doppler_bins, init_cfg.doppler_sigma_bins)
    frames = []
    for t, (positions, velocities) in enumerate(zip(seq.poses, seq.velocities)):
        joints = [
            GaussianJoint(positions[i], np.full(3, sk.default_scales_m[i]), [1.0, 0.0, 0.0, 0.0],
                          velocities[i], init_cfg.opacity, envelope)
            for i in range(sk.num_joints)
        ]
        frames.append(DiprFrame(tuple(joints), t * seq.dt_s))
    return frames
