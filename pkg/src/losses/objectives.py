"""
Optimization Objectives
Soft-mask IoU reconstruction loss, kinesiological bone/velocity losses and
their weighted total. Tensor versions drive the optimizer; the float
wrappers are the public API.
"""

import math
from typing import Optional, Tuple

import numpy as np
import torch

from src.core.exceptions import DomainError, ShapeError
from src.core.types import Heatmap, HeatmapGrid, RadarParams, Skeleton
from src.dipr.joint import DiprFrame
from src.dipr.params import FrameParams
from src.renderer.kernels import RenderKernelParams
from src.renderer.render import (
    DTYPE, TensorParams, check_coverage, grads_to_params, heatmap_tensor, params_to_tensors,
)
from .weights import LossWeights

MASK_EPS = 1e-12
MIN_BONE_LENGTH = 1e-6


def mask_threshold(values, top_fraction: float) -> float:
    """
    Smallest value t such that at least ceil(top_fraction * cells) cells are >= t.

    When that quantile is 0 but some cells are positive, the smallest positive
    value is used so the mask is the nonzero support. Returns 0 for an
    all-zero array (empty mask).
    """
    flat = np.sort(np.ravel(np.asarray(values, dtype=np.float64)))[::-1]
    if flat.size == 0 or flat[0] <= 0:
        return 0.0
    keep = max(1, math.ceil(top_fraction * flat.size - 1e-9))
    threshold = float(flat[min(keep, flat.size) - 1])
    if threshold <= 0:
        threshold = float(flat[flat > 0][-1])
    return threshold


def soft_mask(values: torch.Tensor, threshold: float, tau: float) -> torch.Tensor:
    if threshold <= 0:
        return torch.zeros_like(values)
    return torch.sigmoid((values - threshold) / (tau * threshold + MASK_EPS))


def soft_iou_loss(mask_a: torch.Tensor, mask_b: torch.Tensor, variant: str = "tanimoto") -> torch.Tensor:
    """
    1 - soft IoU; both masks empty gives 0.

    "tanimoto" divides by sum(a^2 + b^2 - ab) and is exactly 0 for identical
    masks. "product" divides by sum(a + b - ab); it stays above 0 for
    identical soft masks whose values are not all 0 or 1, so it is not the
    default.
    """
    intersection = (mask_a * mask_b).sum()
    if variant == "tanimoto":
        union = (mask_a * mask_a + mask_b * mask_b - mask_a * mask_b).sum()
    else:
        union = (mask_a + mask_b - mask_a * mask_b).sum()
    if union.item() == 0:
        return torch.zeros((), dtype=DTYPE)
    return 1.0 - intersection / union


def recon_loss_tensor(
    h_dipr: torch.Tensor,
    obs_values: np.ndarray,
    w: LossWeights,
    thresholds: Optional[Tuple[float, float]] = None,
) -> torch.Tensor:
    """Reconstruction loss of a rendered tensor against observed values; thresholds are constants."""
    if thresholds is None:
        thresholds = (
            mask_threshold(h_dipr.detach().numpy(), w.top_fraction),
            mask_threshold(obs_values, w.top_fraction),
        )
    t_dipr, t_obs = thresholds
    mask_dipr = soft_mask(h_dipr, t_dipr, w.softness_tau)
    mask_obs = soft_mask(torch.as_tensor(obs_values, dtype=DTYPE), t_obs, w.softness_tau)
    return soft_iou_loss(mask_dipr, mask_obs, w.soft_iou)


def recon_loss(h_dipr: Heatmap, h_obs: Heatmap, w: LossWeights = LossWeights()) -> float:
    """
    Soft-mask IoU loss between two heatmaps on the same grid.

    Returns:
        Loss in [0, 1]; 0 for identical heatmaps

    Raises:
        ShapeError: If the grids differ
    """
    h_dipr.require_same_grid(h_obs)
    loss = recon_loss_tensor(torch.as_tensor(h_dipr.values, dtype=DTYPE), h_obs.values, w)
    return float(loss.item())


def _edge_vectors(positions: torch.Tensor, sk: Skeleton):
    first = torch.tensor([i for i, _ in sk.edges], dtype=torch.long)
    second = torch.tensor([j for _, j in sk.edges], dtype=torch.long)
    return positions[first] - positions[second], first, second


def bone_loss_tensor(positions: torch.Tensor, sk: Skeleton) -> torch.Tensor:
    diff, _, _ = _edge_vectors(positions, sk)
    lengths = torch.linalg.norm(diff, dim=1)
    target = torch.tensor(sk.bone_lengths_m, dtype=DTYPE)
    return ((lengths - target) ** 2).sum()


def velocity_loss_tensor(positions: torch.Tensor, velocities: torch.Tensor, sk: Skeleton) -> torch.Tensor:
    diff, first, second = _edge_vectors(positions, sk)
    lengths = torch.linalg.norm(diff, dim=1)
    if torch.any(lengths.detach() <= MIN_BONE_LENGTH):
        edge = int(torch.argmin(lengths.detach()))
        i, j = sk.edges[edge]
        raise DomainError(
            f"Adjacent joints {sk.joint_names[i]} and {sk.joint_names[j]} coincide; bone direction undefined"
        )
    direction = diff / lengths[:, None]
    relative = velocities[first] - velocities[second]
    return ((relative * direction).sum(dim=1) ** 2).sum()


def kine_loss_tensor(t: TensorParams, sk: Skeleton, w: LossWeights) -> torch.Tensor:
    bone = bone_loss_tensor(t["positions"], sk)
    velocity = velocity_loss_tensor(t["positions"], t["velocities"], sk)
    return w.lambda1 * bone + (1.0 - w.lambda1) * velocity


def _positions(frame: DiprFrame, sk: Skeleton) -> torch.Tensor:
    frame.check_skeleton(sk)
    return torch.as_tensor(frame.positions, dtype=DTYPE)


def bone_loss(frame: DiprFrame, sk: Skeleton) -> float:
    """Sum over edges of squared bone-length deviation."""
    return float(bone_loss_tensor(_positions(frame, sk), sk).item())


def velocity_loss(frame: DiprFrame, sk: Skeleton) -> float:
    """Sum over edges of squared relative velocity along the bone direction."""
    velocities = torch.as_tensor(frame.velocities, dtype=DTYPE)
    return float(velocity_loss_tensor(_positions(frame, sk), velocities, sk).item())


def kine_loss(frame: DiprFrame, sk: Skeleton, w: LossWeights = LossWeights()) -> float:
    return w.lambda1 * bone_loss(frame, sk) + (1.0 - w.lambda1) * velocity_loss(frame, sk)


def total_loss_tensor(
    t: TensorParams,
    obs_values: np.ndarray,
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams,
    w: LossWeights,
    thresholds: Optional[Tuple[float, float]] = None,
) -> torch.Tensor:
    """lambda2 * recon + (1 - lambda2) * kine on tensor parameters."""
    h = heatmap_tensor(t, rp, grid, kp)
    recon = recon_loss_tensor(h, obs_values, w, thresholds)
    return w.lambda2 * recon + (1.0 - w.lambda2) * kine_loss_tensor(t, sk, w)


def _blur_matrix(n: int, sigma_bins: float) -> torch.Tensor:
    offsets = torch.arange(n, dtype=DTYPE)
    kernel = torch.exp(-0.5 * ((offsets[:, None] - offsets[None, :]) / sigma_bins) ** 2)
    return kernel / kernel.sum(dim=1, keepdim=True)


def blur_range_angle(values: torch.Tensor, sigma_bins: float) -> torch.Tensor:
    """Separable Gaussian blur over the range and angle axes; sigma 0 returns the input."""
    if sigma_bins <= 0:
        return values
    b_range = _blur_matrix(values.shape[0], sigma_bins)
    b_angle = _blur_matrix(values.shape[2], sigma_bins)
    return torch.einsum("ij,jvk,lk->ivl", b_range, values, b_angle)


def staged_loss_tensor(
    t: TensorParams,
    obs_blurred: torch.Tensor,
    obs_values: np.ndarray,
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams,
    w: LossWeights,
    blur_bins: float,
) -> Tuple[torch.Tensor, float]:
    """
    Objective of one coarse-to-fine stage and the plain total loss.

    The stage objective compares heatmaps blurred by blur_bins over range and
    angle (obs_blurred must be blur_range_angle of obs_values). Both share
    one rendering; with blur_bins 0 they are equal.

    Returns:
        (stage objective tensor, total loss value)
    """
    h = heatmap_tensor(t, rp, grid, kp)
    kine = (1.0 - w.lambda2) * kine_loss_tensor(t, sk, w)
    stage = w.lambda2 * recon_loss_tensor(blur_range_angle(h, blur_bins), obs_blurred.numpy(), w) + kine
    if blur_bins <= 0:
        return stage, float(stage.item())
    with torch.no_grad():
        total = w.lambda2 * recon_loss_tensor(h.detach(), obs_values, w) + kine.detach()
    return stage, float(total.item())


def total_loss(
    frame: DiprFrame,
    h_obs: Heatmap,
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    w: LossWeights = LossWeights(),
    thresholds: Optional[Tuple[float, float]] = None,
) -> Tuple[float, FrameParams]:
    """
    Total loss of a frame against an observed heatmap, with gradients.

    Args:
        frame: Frame aligned to sk
        h_obs: Observed heatmap on grid
        sk: Skeleton providing edges and bone lengths
        rp, grid, kp: Forward-model configuration
        w: Loss weights
        thresholds: Optional frozen (rendered, observed) mask thresholds

    Returns:
        (loss, gradient set over p, s, q, v, beta, phi)
    """
    frame.check_skeleton(sk)
    if h_obs.grid != grid:
        raise ShapeError(f"Observed heatmap grid {h_obs.grid} differs from render grid {grid}")
    params = frame.to_params()
    check_coverage(params, grid, kp, sk.joint_names)
    tensors = params_to_tensors(params, requires_grad=True)
    loss = total_loss_tensor(tensors, h_obs.values, sk, rp, grid, kp, w, thresholds)
    if loss.requires_grad:
        loss.backward()
    return float(loss.item()), grads_to_params(tensors)


def frozen_thresholds(frame: DiprFrame, h_obs: Heatmap, rp, grid, kp, w: LossWeights) -> Tuple[float, float]:
    """Mask thresholds at a base point, for differentiating a fixed function."""
    tensors = params_to_tensors(frame.to_params())
    with torch.no_grad():
        rendered = heatmap_tensor(tensors, rp, grid, kp).numpy()
    return mask_threshold(rendered, w.top_fraction), mask_threshold(h_obs.values, w.top_fraction)
