"""
M-GS Fitter
Initializes Gaussian joints from an observed heatmap and refines them by
adaptive first-order descent on the total loss, then exports the fitted
frame back to heatmap and point cloud form.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from loguru import logger
from tqdm import tqdm

from src.cfar.detector import CfarConfig, ca_cfar
from src.core.config import DEFAULT_CONFIG_PATH, load_config
from src.core.exceptions import FitError, MGSError, ShapeError
from src.core.skeleton import load_skeleton
from src.core.types import Heatmap, HeatmapGrid, PointCloud, RadarParams, Skeleton
from src.dipr.initialization import InitConfig, init_from_coarse
from src.dipr.joint import DiprFrame
from src.dipr.params import FrameParams
from src.geometry.extraction import extract_coarse, flow_radial_velocity
from src.losses.objectives import blur_range_angle, staged_loss_tensor
from src.renderer.kernels import RenderKernelParams
from src.renderer.render import DTYPE, check_coverage, params_to_tensors, render, tensors_to_params
from .config import LR_FIELDS, ExtractionConfig, FitConfig

IterationCallback = Callable[[int, float, FrameParams], None]

# Projected joints stay this many bins inside the coverage edges
COVERAGE_MARGIN_BINS = 0.01
MAX_ELEVATION_RAD = 1.4


@dataclass
class FitReport:
    """Outcome of one frame fit. loss_trace[k] is the loss at iterate k."""

    final_loss: float
    loss_trace: List[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False
    wall_time_s: float = 0.0
    stop_reason: str = "max_iters"
    best_iteration: int = 0

    def to_dict(self, include_timing: bool = True) -> Dict:
        """Plain-data report; without timing the document is reproducible byte for byte."""
        document = {
            "final_loss": float(self.final_loss),
            "iterations_run": int(self.iterations_run),
            "converged": bool(self.converged),
            "stop_reason": self.stop_reason,
            "best_iteration": int(self.best_iteration),
            "loss_trace": [float(v) for v in self.loss_trace],
        }
        if include_timing:
            document["wall_time_s"] = float(self.wall_time_s)
        return document

    def __repr__(self):
        return (
            f"FitReport(final_loss={self.final_loss:.6g}, iterations={self.iterations_run}, "
            f"converged={self.converged}, stop='{self.stop_reason}')"
        )


def initial_frame(
    h_obs: Heatmap,
    sk: Skeleton,
    extraction: ExtractionConfig = ExtractionConfig(),
    init_cfg: InitConfig = InitConfig(),
    neighbor: Optional[Heatmap] = None,
    dt_s: float = 0.1,
    timestamp_s: float = 0.0,
) -> DiprFrame:
    """Coarse extraction followed by skeleton initialization."""
    override = None
    if extraction.use_flow_velocity and neighbor is not None:
        override = flow_radial_velocity(h_obs, neighbor, dt_s)
    coarse = extract_coarse(
        h_obs,
        extraction.top_fraction,
        radial_velocity_override=override,
        ablate_position=extraction.ablate_position,
        ablate_velocity=extraction.ablate_velocity,
    )
    return init_from_coarse(sk, coarse, init_cfg, timestamp_s)


def _jitter(params: FrameParams, fc: FitConfig) -> FrameParams:
    if fc.init_jitter_m > 0:
        rng = np.random.default_rng(fc.seed)
        params.positions = params.positions + rng.normal(0.0, fc.init_jitter_m, params.positions.shape)
    return params


def project_into_coverage(positions: torch.Tensor, grid: HeatmapGrid, kp: RenderKernelParams):
    """
    Move joints outside the renderable range/azimuth window back onto it in place.

    Range and azimuth are clamped a small margin inside the grid coverage;
    elevation is kept. Joints already inside are left bit-identical.
    """
    with torch.no_grad():
        r = torch.linalg.norm(positions, dim=1)
        rho = torch.sqrt(positions[:, 0] ** 2 + positions[:, 1] ** 2)
        az = torch.atan2(positions[:, 1], positions[:, 0])
        el = torch.atan2(positions[:, 2], rho)

        r_low, r_high = grid.coverage("range")
        a_low, a_high = grid.coverage("angle")
        r_margin = COVERAGE_MARGIN_BINS * grid.range_res_m
        a_margin = COVERAGE_MARGIN_BINS * grid.angle_res_rad
        r_clamped = r.clamp(max(r_low, kp.r_min_m) + r_margin, r_high - r_margin)
        az_clamped = az.clamp(a_low + a_margin, a_high - a_margin)

        outside = (r_clamped != r) | (az_clamped != az) | (positions[:, 0] <= 0)
        if not torch.any(outside):
            return
        el = el[outside].clamp(-MAX_ELEVATION_RAD, MAX_ELEVATION_RAD)
        r_new, az_new = r_clamped[outside], az_clamped[outside]
        positions[outside] = torch.stack([
            r_new * torch.cos(el) * torch.cos(az_new),
            r_new * torch.cos(el) * torch.sin(az_new),
            r_new * torch.sin(el),
        ], dim=1)


def project_params(
    tensors: Dict[str, torch.Tensor],
    fc: FitConfig,
    grid: Optional[HeatmapGrid] = None,
    kp: RenderKernelParams = RenderKernelParams(),
):
    """Map parameters back onto their manifolds in place; positions too when grid is given."""
    with torch.no_grad():
        q = tensors["rotations"]
        q.div_(torch.linalg.norm(q, dim=1, keepdim=True).clamp_min(1e-12))
        tensors["scales"].clamp_(fc.scale_min_m, fc.scale_max_m)
        tensors["opacities"].clamp_(min=0.0)
        phi = tensors["doppler_features"]
        phi.clamp_(min=0.0)
        totals = phi.sum(dim=1, keepdim=True)
        empty = (totals <= 0).squeeze(1)
        if torch.any(empty):
            phi[empty] = 1.0 / phi.shape[1]
            totals = phi.sum(dim=1, keepdim=True)
        phi.div_(totals)
    if grid is not None:
        project_into_coverage(tensors["positions"], grid, kp)


def _max_gradient(tensors: Dict[str, torch.Tensor]) -> float:
    return max(
        (float(t.grad.abs().max()) if t.grad is not None and t.grad.numel() else 0.0)
        for t in tensors.values()
    )


def _load(tensors: Dict[str, torch.Tensor], params: FrameParams):
    with torch.no_grad():
        for name, value in params.items():
            tensors[name].copy_(torch.as_tensor(value, dtype=tensors[name].dtype))


def fit_frame(
    h_obs: Heatmap,
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    fc: FitConfig = FitConfig(),
    init: Optional[DiprFrame] = None,
    init_cfg: InitConfig = InitConfig(),
    extraction: ExtractionConfig = ExtractionConfig(),
    callback: Optional[IterationCallback] = None,
    timestamp_s: Optional[float] = None,
) -> Tuple[DiprFrame, FitReport]:
    """
    Fit Gaussian joints to one observed heatmap.

    The fit runs coarse-to-fine: each stage of fc.stage_budgets() compares
    heatmaps blurred over range and angle, starting from the best iterate
    of the previous stage with fresh Adam moments, and the last stage
    uses the unblurred total loss. A step that raises the stage objective
    is undone and step sizes shrink by fc.lr_decay; they also shrink when
    a stage stops improving. Every iterate is projected back into the
    grid coverage.

    Args:
        h_obs: Observed heatmap on grid
        sk: Skeleton the joints follow
        rp, grid, kp: Forward-model configuration
        fc: Optimizer settings
        init: Starting frame; extracted from h_obs when omitted
        init_cfg: Initialization settings for extraction
        extraction: Coarse extraction settings
        callback: Called with (iteration, loss, params) after each evaluation
        timestamp_s: Timestamp of the result (defaults to init's)

    Returns:
        (frame with the lowest total loss, FitReport); loss_trace holds the
        unblurred total loss of every iterate

    Raises:
        FitError: If the loss becomes non-finite
        RenderError: If the starting frame lies outside the grid coverage
    """
    if h_obs.grid != grid:
        raise ShapeError(f"Observed heatmap grid {h_obs.grid} differs from fit grid {grid}")
    start = time.perf_counter()

    if init is None:
        init = initial_frame(h_obs, sk, extraction, init_cfg)
    init.check_skeleton(sk)
    stamp = init.timestamp_s if timestamp_s is None else timestamp_s
    start_params = init.to_params()
    check_coverage(start_params, grid, kp, sk.joint_names)

    tensors = params_to_tensors(_jitter(start_params, fc), requires_grad=True)
    project_params(tensors, fc, grid, kp)
    obs = torch.as_tensor(h_obs.values, dtype=DTYPE)

    w = fc.loss_weights
    trace: List[float] = []
    best_loss, best_params, best_iteration = math.inf, None, 0
    converged, stop_reason = False, "max_iters"
    iteration = 0

    for stage, (blur_bins, budget) in enumerate(fc.stage_budgets()):
        final_stage = blur_bins <= 0
        obs_blurred = blur_range_angle(obs, blur_bins)
        optimizer = torch.optim.Adam(
            [{"params": [tensors[name]], "lr": getattr(fc, lr_field), "name": name}
             for name, lr_field in LR_FIELDS.items()],
            betas=(fc.adaptive_beta1, fc.adaptive_beta2),
            eps=fc.adaptive_eps,
        )
        scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
            optimizer, mode="min", factor=fc.lr_decay, patience=fc.lr_patience
        )
        stage_trace: List[float] = []
        stage_best, stage_best_params = math.inf, None
        calm = rejections = 0
        stage_stop = "max_iters"

        for _ in range(budget):
            optimizer.zero_grad()
            current = tensors_to_params(tensors)
            check_coverage(current, grid, kp, sk.joint_names)
            objective, value = staged_loss_tensor(tensors, obs_blurred, h_obs.values, sk, rp, grid, kp, w,
                                                  blur_bins)
            stage_value = float(objective.item())
            if not (math.isfinite(stage_value) and math.isfinite(value)):
                raise FitError(iteration, f"non-finite loss {value}")

            trace.append(value)
            rejected = stage_value > stage_best + fc.convergence_tol * max(1.0, abs(stage_best))
            if value < best_loss:
                best_loss, best_params, best_iteration = value, current, iteration
            if stage_value < stage_best:
                stage_best, stage_best_params = stage_value, current
            if callback is not None:
                callback(iteration, value, current)
            stage_trace.append(stage_value)
            iteration += 1

            if objective.requires_grad:
                objective.backward()
            if _max_gradient(tensors) <= fc.gradient_tol:
                stage_stop = "stationary"
                break
            if len(stage_trace) > 1:
                delta = abs(stage_trace[-1] - stage_trace[-2])
                calm = calm + 1 if delta <= fc.convergence_tol * max(1.0, abs(stage_value)) else 0
                if calm >= fc.patience:
                    stage_stop = "converged"
                    break

            if rejected:
                # Step back to the stage best with shorter steps
                _load(tensors, stage_best_params)
                for group in optimizer.param_groups:
                    group["lr"] *= fc.lr_decay
                rejections += 1
                continue
            optimizer.step()
            scheduler.step(stage_value)
            project_params(tensors, fc, grid, kp)
            logger.debug(f"iter {iteration - 1} (blur {blur_bins:g}): loss={value:.8g} stage={stage_value:.8g}")

        if final_stage:
            converged, stop_reason = stage_stop != "max_iters", stage_stop
        elif stage_best_params is not None:
            _load(tensors, stage_best_params)
            logger.debug(f"Stage {stage} (blur {blur_bins:g} bins) ended: {stage_stop}, best {stage_best:.6g}, "
                         f"{rejections} steps rejected")

    report = FitReport(
        final_loss=best_loss,
        loss_trace=trace,
        iterations_run=len(trace),
        converged=converged,
        wall_time_s=time.perf_counter() - start,
        stop_reason=stop_reason,
        best_iteration=best_iteration,
    )
    logger.debug(f"Fit finished: {report}")
    return DiprFrame.from_params(best_params, stamp), report


def fit_sequence(
    frames: Sequence[Heatmap],
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    fc: FitConfig = FitConfig(),
    init: Optional[DiprFrame] = None,
    init_cfg: InitConfig = InitConfig(),
    extraction: ExtractionConfig = ExtractionConfig(),
    show_progress: bool = False,
) -> List[Tuple[DiprFrame, FitReport]]:
    """
    Fit a heatmap sequence, warm-starting each frame from the previous fit.

    Frame 0 starts from `init` when given, otherwise from extraction.
    """
    frames = list(frames)
    for t, h in enumerate(frames):
        if h.grid != grid:
            raise ShapeError(f"Frame {t} grid differs from the sequence grid")

    results: List[Tuple[DiprFrame, FitReport]] = []
    previous = init
    for t in tqdm(range(len(frames)), desc="Fitting frames", disable=not show_progress):
        stamp = t * fc.frame_interval_s
        try:
            if previous is None:
                neighbor = frames[1] if len(frames) > 1 else None
                previous = initial_frame(frames[0], sk, extraction, init_cfg, neighbor, fc.frame_interval_s, stamp)
            fitted, report = fit_frame(frames[t], sk, rp, grid, kp, fc, init=previous, timestamp_s=stamp)
        except MGSError as e:
            logger.error(f"Fit of frame {t} failed: {e}")
            raise
        results.append((fitted, report))
        previous = fitted
        logger.info(f"Frame {t}: loss {report.final_loss:.6g} after {report.iterations_run} iterations")
    return results


def dipr_to_heatmap(
    frame: DiprFrame, rp: RadarParams, grid: HeatmapGrid, kp: RenderKernelParams = RenderKernelParams()
) -> Heatmap:
    """DIPR-HM: the fitted frame rendered back to a heatmap."""
    return render(frame, rp, grid, kp)


def dipr_to_pointcloud(
    frame: DiprFrame,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    cfg: CfarConfig = CfarConfig(),
) -> PointCloud:
    """DIPR-PC: CA-CFAR applied to the rendered heatmap."""
    return ca_cfar(dipr_to_heatmap(frame, rp, grid, kp), cfg)


class MGSFitter:
    """
    Configured fitting pipeline.

    Builds every component (radar, grid, kernels, optimizer settings,
    initialization, extraction, CFAR, skeleton) from one YAML config.
    """

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH, config: Optional[Dict] = None,
                 skeleton: Optional[Skeleton] = None):
        """
        Initialize fitter.

        Args:
            config_path: Path to the YAML configuration
            config: Already-loaded configuration (takes precedence over config_path)
            skeleton: Skeleton override (defaults to the shipped skeleton)
        """
        self.config = config if config is not None else load_config(config_path)

        self.radar = RadarParams.from_config(self.config)
        self.grid = HeatmapGrid.from_config(self.config)
        self.kernel = RenderKernelParams.from_config(self.config)
        self.fit_config = FitConfig.from_config(self.config)
        self.init_config = InitConfig.from_config(self.config)
        self.extraction = ExtractionConfig.from_config(self.config)
        self.cfar = CfarConfig.from_config(self.config)
        self.skeleton = skeleton if skeleton is not None else load_skeleton(self.config.get("skeleton_path"))

        logger.info(
            f"MGSFitter initialized: grid {self.grid.shape}, max_iters={self.fit_config.max_iters}, "
            f"lambda1={self.fit_config.loss_weights.lambda1}, lambda2={self.fit_config.loss_weights.lambda2}"
        )

    def fit_frame(self, h_obs: Heatmap, init: Optional[DiprFrame] = None,
                  callback: Optional[IterationCallback] = None) -> Tuple[DiprFrame, FitReport]:
        return fit_frame(h_obs, self.skeleton, self.radar, h_obs.grid, self.kernel, self.fit_config,
                         init, self.init_config, self.extraction, callback)

    def fit_sequence(self, frames: Sequence[Heatmap], init: Optional[DiprFrame] = None,
                     show_progress: bool = True) -> List[Tuple[DiprFrame, FitReport]]:
        frames = list(frames)
        if not frames:
            return []
        results = fit_sequence(frames, self.skeleton, self.radar, frames[0].grid, self.kernel,
                               self.fit_config, init, self.init_config, self.extraction, show_progress)
        logger.success(f"Fitted {len(results)} frames")
        return results

    def to_heatmap(self, frame: DiprFrame, grid: Optional[HeatmapGrid] = None) -> Heatmap:
        return dipr_to_heatmap(frame, self.radar, grid or self.grid, self.kernel)

    def to_pointcloud(self, frame: DiprFrame, grid: Optional[HeatmapGrid] = None) -> PointCloud:
        return dipr_to_pointcloud(frame, self.radar, grid or self.grid, self.kernel, self.cfar)
