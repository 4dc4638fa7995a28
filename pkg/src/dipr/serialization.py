"""
Frame Documents
YAML documents listing per-joint fields by name.
"""

from pathlib import Path
from typing import Dict, Optional, Sequence, Union

from src.core.config import load_config, save_yaml
from src.core.exceptions import ConfigError
from .joint import DiprFrame, GaussianJoint


def frame_to_document(frame: DiprFrame, joint_names: Optional[Sequence[str]] = None) -> Dict:
    """Plain-data document for a frame; joints are named when names are given."""
    names = list(joint_names) if joint_names is not None else [f"joint_{i}" for i in range(frame.num_joints)]
    joints = []
    for name, j in zip(names, frame.joints):
        joints.append({
            "name": name,
            "position_m": [float(c) for c in j.position_m],
            "scale_m": [float(c) for c in j.scale_m],
            "rotation": [float(c) for c in j.rotation],
            "velocity_mps": [float(c) for c in j.velocity_mps],
            "opacity": float(j.opacity),
            "doppler_features": [float(c) for c in j.doppler_features],
        })
    return {"timestamp_s": float(frame.timestamp_s), "joints": joints}


def frame_from_document(document: Dict) -> DiprFrame:
    """Inverse of frame_to_document."""
    try:
        joints = [
            GaussianJoint(
                position_m=entry["position_m"],
                scale_m=entry["scale_m"],
                rotation=entry["rotation"],
                velocity_mps=entry["velocity_mps"],
                opacity=entry["opacity"],
                doppler_features=entry["doppler_features"],
            )
            for entry in document["joints"]
        ]
    except (KeyError, TypeError) as e:
        raise ConfigError(f"Malformed frame document: missing or invalid field {e}")
    return DiprFrame(tuple(joints), document.get("timestamp_s", 0.0))


def save_frame(frame: DiprFrame, path: Union[str, Path], joint_names: Optional[Sequence[str]] = None):
    save_yaml(frame_to_document(frame, joint_names), path)


def load_frame(path: Union[str, Path]) -> DiprFrame:
    return frame_from_document(load_config(path))
