"""
Pose and Heatmap Metrics
MPJPE, Procrustes-aligned MPJPE, inter-frame motion intensity and hard
top-fraction IoU.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.core.config import section
from src.core.exceptions import ConfigError, MetricError, ShapeError
from src.core.types import Heatmap
from src.dipr.serialization import load_frame
from src.losses.objectives import mask_threshold
from src.synth.ground_truth import load_ground_truth

COLLINEAR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """Per-frame joint positions, shape (T, J, 3)."""

    positions_m: np.ndarray
    joint_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        positions = np.asarray(self.positions_m, dtype=np.float64)
        if positions.ndim != 3 or positions.shape[2] != 3:
            raise ShapeError(f"PoseSequence needs a (T, J, 3) array, got {positions.shape}")
        object.__setattr__(self, "positions_m", positions)

    def __len__(self) -> int:
        return len(self.positions_m)

    @property
    def num_joints(self) -> int:
        return self.positions_m.shape[1]


def _require_same_shape(pred: PoseSequence, gt: PoseSequence):
    if pred.positions_m.shape != gt.positions_m.shape:
        raise ShapeError(f"Pose shapes differ: {pred.positions_m.shape} vs {gt.positions_m.shape}")


def per_frame_mpjpe(pred: PoseSequence, gt: PoseSequence) -> np.ndarray:
    _require_same_shape(pred, gt)
    return np.linalg.norm(pred.positions_m - gt.positions_m, axis=2).mean(axis=1)


def mpjpe(pred: PoseSequence, gt: PoseSequence) -> float:
    """Mean joint position error in meters."""
    return float(per_frame_mpjpe(pred, gt).mean())


def _check_spread(points: np.ndarray, frame: int, label: str):
    singular = np.linalg.svd(points, compute_uv=False)
    if singular[0] == 0 or singular[1] <= COLLINEAR_TOL * singular[0]:
        raise MetricError(f"Frame {frame}: {label} joints are collinear; Procrustes alignment undefined")


def procrustes_align(pred: np.ndarray, gt: np.ndarray, with_scale: bool = True, frame: int = 0) -> np.ndarray:
    """
    Similarity transform of pred (J, 3) best matching gt in least squares.

    Rotations are restricted to det = +1.
    """
    if len(pred) < 3:
        raise MetricError(f"Frame {frame}: Procrustes alignment needs at least 3 joints")
    mu_pred, mu_gt = pred.mean(axis=0), gt.mean(axis=0)
    x, y = pred - mu_pred, gt - mu_gt
    _check_spread(x, frame, "predicted")
    _check_spread(y, frame, "ground-truth")

    u, s, vt = np.linalg.svd(x.T @ y)
    d = np.sign(np.linalg.det(u @ vt))
    correction = np.diag([1.0, 1.0, d])
    rotation = u @ correction @ vt
    scale = float(np.sum(s * np.diag(correction)) / np.sum(x * x)) if with_scale else 1.0
    return scale * x @ rotation + mu_gt


def per_frame_pa_mpjpe(pred: PoseSequence, gt: PoseSequence, with_scale: bool = True) -> np.ndarray:
    _require_same_shape(pred, gt)
    errors = []
    for t, (p, g) in enumerate(zip(pred.positions_m, gt.positions_m)):
        aligned = procrustes_align(p, g, with_scale, frame=t)
        errors.append(np.linalg.norm(aligned - g, axis=1).mean())
    return np.array(errors)


def pa_mpjpe(pred: PoseSequence, gt: PoseSequence, with_scale: bool = True) -> float:
    """MPJPE after per-frame Procrustes alignment of pred to gt."""
    return float(per_frame_pa_mpjpe(pred, gt, with_scale).mean())


def motion_intensity(seq: PoseSequence, dt: float) -> np.ndarray:
    """
    Mean joint speed between consecutive frames, length T - 1.

    Raises:
        MetricError: If the sequence has fewer than 2 frames
    """
    if len(seq) < 2:
        raise MetricError(f"Motion intensity needs at least 2 frames, got {len(seq)}")
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    steps = np.diff(seq.positions_m, axis=0)
    return np.linalg.norm(steps, axis=2).mean(axis=1) / dt


def hard_mask(h: Heatmap, top_fraction: float) -> np.ndarray:
    threshold = mask_threshold(h.values, top_fraction)
    if threshold <= 0:
        return np.zeros(h.values.shape, dtype=bool)
    return h.values >= threshold


def hard_iou(a: Heatmap, b: Heatmap, top_fraction: float = 0.1) -> float:
    """Binary top-fraction mask IoU; two empty masks give 1."""
    a.require_same_grid(b)
    mask_a, mask_b = hard_mask(a, top_fraction), hard_mask(b, top_fraction)
    union = np.logical_or(mask_a, mask_b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(mask_a, mask_b).sum() / union)


def load_pose_sequence(path: Union[str, Path]) -> PoseSequence:
    """
    Load poses from a `gt.poses` file or a directory of fitted frame documents.

    Raises:
        FileNotFoundError: If the path does not exist or the directory holds no frames
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("frame_*.dipr.yaml"))
        if not files:
            raise FileNotFoundError(f"No frame_*.dipr.yaml documents in {path}")
        return PoseSequence(np.stack([load_frame(f).positions for f in files]))
    if not path.exists():
        raise FileNotFoundError(f"Pose file not found: {path}")
    truth = load_ground_truth(path)
    return PoseSequence(truth.poses, truth.joint_names)


class PoseMetrics:
    """
    Pose-estimation metrics calculator.

    Metrics:
    - MPJPE
    - PA-MPJPE (similarity or rigid alignment)
    - Inter-frame motion intensity
    """

    def __init__(self, with_scale: bool = True):
        """
        Initialize metrics calculator.

        Args:
            with_scale: Include uniform scale in Procrustes alignment
        """
        self.with_scale = with_scale

    @classmethod
    def from_config(cls, config: Dict) -> "PoseMetrics":
        evaluation = section(config, "evaluation")
        return cls(with_scale=bool(evaluation.get("procrustes_scale", True)))

    def evaluate(self, pred: PoseSequence, gt: PoseSequence, dt: float) -> Tuple[Dict, pd.DataFrame]:
        """
        Compute all pose metrics.

        Args:
            pred: Predicted poses
            gt: Ground-truth poses (same shape)
            dt: Frame interval in seconds

        Returns:
            (summary report, per-frame DataFrame)
        """
        frame_mpjpe = per_frame_mpjpe(pred, gt)
        frame_pa = per_frame_pa_mpjpe(pred, gt, self.with_scale)

        per_frame = pd.DataFrame({
            "frame": np.arange(len(gt)),
            "mpjpe_m": frame_mpjpe,
            "pa_mpjpe_m": frame_pa,
        })

        report = {
            "frames": len(gt),
            "joints": gt.num_joints,
            "mpjpe_m": float(frame_mpjpe.mean()),
            "pa_mpjpe_m": float(frame_pa.mean()),
            "procrustes_scale": self.with_scale,
        }

        if len(gt) >= 2:
            pred_intensity = motion_intensity(pred, dt)
            gt_intensity = motion_intensity(gt, dt)
            per_frame["motion_intensity_pred_mps"] = np.concatenate([[np.nan], pred_intensity])
            per_frame["motion_intensity_gt_mps"] = np.concatenate([[np.nan], gt_intensity])
            report["motion_intensity_pred_mps"] = pred_intensity.tolist()
            report["motion_intensity_gt_mps"] = gt_intensity.tolist()
            report["motion_intensity_mae_mps"] = float(np.abs(pred_intensity - gt_intensity).mean())

        logger.info(f"Evaluated {len(gt)} frames: MPJPE={report['mpjpe_m']:.4f} m, PA-MPJPE={report['pa_mpjpe_m']:.4f} m")
        return report, per_frame

    def format_metrics_report(self, report: Dict) -> str:
        """Format a summary report for logs."""
        lines = [
            "=" * 50,
            "POSE METRICS",
            "=" * 50,
            f"Frames:            {report['frames']}",
            f"Joints:            {report['joints']}",
            f"MPJPE:             {report['mpjpe_m'] * 1000:.2f} mm",
            f"PA-MPJPE:          {report['pa_mpjpe_m'] * 1000:.2f} mm",
        ]
        if "motion_intensity_mae_mps" in report:
            lines.append(f"Motion int. MAE:   {report['motion_intensity_mae_mps']:.4f} m/s")
        lines.append("=" * 50)
        return "\n".join(lines)
