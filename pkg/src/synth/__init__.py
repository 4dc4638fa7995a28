"""
Synthetic scenes: motion programs, clutter, noise and ground truth.
"""

from .scene import SceneSpec, MOTIONS, pose_at, trajectory, arm_length
from .ground_truth import GroundTruthSequence, save_ground_truth, load_ground_truth, ground_truth_frames
from .generator import generate_scene, snr_of, calibrate_noise, clutter_params

__all__ = [
    "SceneSpec", "MOTIONS", "pose_at", "trajectory", "arm_length",
    "GroundTruthSequence", "save_ground_truth", "load_ground_truth", "ground_truth_frames",
    "generate_scene", "snr_of", "calibrate_noise", "clutter_params",
]
