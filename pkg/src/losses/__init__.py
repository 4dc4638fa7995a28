"""
Reconstruction, kinesiological and total objectives.
"""

from .weights import LossWeights, SOFT_IOU_VARIANTS
from .objectives import (
    mask_threshold, soft_mask, soft_iou_loss, recon_loss, bone_loss, velocity_loss,
    kine_loss, total_loss, total_loss_tensor, frozen_thresholds, blur_range_angle, staged_loss_tensor,
)

__all__ = [
    "LossWeights", "SOFT_IOU_VARIANTS",
    "mask_threshold", "soft_mask", "soft_iou_loss", "recon_loss", "bone_loss", "velocity_loss",
    "kine_loss", "total_loss", "total_loss_tensor", "frozen_thresholds", "blur_range_angle",
    "staged_loss_tensor",
]
