"""
Evaluation metrics for fitted pose sequences.
"""

from .metrics import (
    PoseSequence, PoseMetrics, mpjpe, pa_mpjpe, per_frame_mpjpe, per_frame_pa_mpjpe,
    procrustes_align, motion_intensity, hard_iou, hard_mask, load_pose_sequence,
)

__all__ = [
    "PoseSequence", "PoseMetrics", "mpjpe", "pa_mpjpe", "per_frame_mpjpe", "per_frame_pa_mpjpe",
    "procrustes_align", "motion_intensity", "hard_iou", "hard_mask", "load_pose_sequence",
]
