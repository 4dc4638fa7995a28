"""
Gradient Check
Compares autograd gradients of the total loss with central finite
differences at random coordinates of random small scenes.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional

import numpy as np
import torch
from loguru import logger

from src.core.config import require_positive, section
from src.core.exceptions import ConfigError
from src.core.types import HeatmapGrid, RadarParams, Skeleton
from src.dipr.joint import doppler_envelope
from src.dipr.params import FrameParams
from src.losses.objectives import mask_threshold, total_loss_tensor
from src.losses.weights import LossWeights
from src.renderer.kernels import RenderKernelParams
from src.renderer.render import check_coverage, grads_to_params, heatmap_tensor, params_to_tensors
from .param_vector import ParamVector, finite_difference_oracle

MACHINE_EPS = np.finfo(np.float64).eps
# Rounding error of one loss evaluation, in units of eps * max(|f|, 1)
ROUNDING_FACTOR = 64.0


@dataclass(frozen=True)
class GradcheckConfig:
    """Settings of the randomized gradient check (section `gradcheck`)."""

    count: int = 1000
    scenes: int = 20
    seed: int = 0
    tolerance: float = 1e-4
    min_gradient: float = 1e-8
    relative_step: float = 1e-6
    position_noise_m: float = 0.02
    observed_offset_m: float = 0.05
    velocity_sigma_mps: float = 0.3

    def __post_init__(self):
        for name in ("count", "scenes", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise ConfigError(f"gradcheck.{name} must be an integer >= 0, got {value}")
            object.__setattr__(self, name, int(value))
        if self.scenes < 1:
            raise ConfigError("gradcheck.scenes must be >= 1")
        for name in ("tolerance", "min_gradient", "relative_step"):
            object.__setattr__(self, name, require_positive(f"gradcheck.{name}", getattr(self, name)))

    @classmethod
    def from_config(cls, config: Dict) -> "GradcheckConfig":
        values = {k: v for k, v in section(config, "gradcheck").items() if k != "grid"}
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"Unknown gradcheck settings: {sorted(unknown)}")
        return cls(**values)

    @staticmethod
    def grid_from_config(config: Dict) -> HeatmapGrid:
        """Grid of the random scenes: `gradcheck.grid` overrides applied to the main grid."""
        grid_fields = HeatmapGrid.from_config(config).to_dict()
        overrides = section(section(config, "gradcheck"), "grid")
        unknown = set(overrides) - set(grid_fields)
        if unknown:
            raise ConfigError(f"Unknown gradcheck.grid settings: {sorted(unknown)}")
        grid_fields.update(overrides)
        return HeatmapGrid(**grid_fields)


@dataclass
class GradcheckReport:
    """Outcome of a gradient check. Excluded coordinates are counted, not compared."""

    max_rel_err: float = 0.0
    worst_coordinate: Optional[Dict] = None
    passed: bool = True
    requested: int = 0
    compared: int = 0
    below_threshold: int = 0
    kinks_excluded: int = 0
    noise_floored: int = 0
    tolerance: float = 1e-4
    per_scene_max: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "pass": bool(self.passed),
            "max_rel_err": float(self.max_rel_err),
            "worst_coordinate": self.worst_coordinate,
            "tolerance": float(self.tolerance),
            "requested": int(self.requested),
            "compared": int(self.compared),
            "below_threshold": int(self.below_threshold),
            "kinks_excluded": int(self.kinks_excluded),
            "noise_floored": int(self.noise_floored),
            "per_scene_max": [float(v) for v in self.per_scene_max],
        }


def random_scene(sk: Skeleton, grid: HeatmapGrid, kp: RenderKernelParams,
                 cfg: GradcheckConfig, rng: np.random.Generator, doppler_bins: int = 16):
    """
    A perturbed skeleton frame and an observed scene near it.

    Returns:
        (frame parameters, observed parameters)
    """
    offsets = sk.tpose_positions_m - sk.tpose_positions_m[sk.root_index]
    r_low, r_high = grid.coverage("range")
    n = sk.num_joints

    for _ in range(100):
        anchor = np.array([
            rng.uniform(r_low + 0.35 * (r_high - r_low), r_low + 0.5 * (r_high - r_low)),
            rng.uniform(-0.15, 0.15),
            0.0,
        ])
        positions = anchor + offsets + rng.normal(0.0, cfg.position_noise_m, (n, 3))
        rotations = rng.normal(size=(n, 4))
        rotations /= np.linalg.norm(rotations, axis=1, keepdims=True)
        phi = rng.dirichlet(np.full(doppler_bins, 2.0), size=n)
        params = FrameParams(
            positions=positions,
            scales=rng.uniform(0.05, 0.15, (n, 3)),
            rotations=rotations,
            velocities=rng.normal(0.0, cfg.velocity_sigma_mps, (n, 3)),
            opacities=rng.uniform(0.5, 1.5, n),
            doppler_features=phi,
        )
        observed = params.copy()
        observed.positions = positions + rng.normal(0.0, cfg.observed_offset_m, (n, 3))
        observed.doppler_features = np.tile(doppler_envelope(doppler_bins), (n, 1))
        try:
            check_coverage(params, grid, kp)
            check_coverage(observed, grid, kp)
        except ValueError:
            continue
        return params, observed
    raise ConfigError("Could not place a random gradcheck scene inside the grid coverage")


def _check_scene(
    index: int,
    count: int,
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams,
    w: LossWeights,
    cfg: GradcheckConfig,
) -> Dict:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index]))
    params, observed = random_scene(sk, grid, kp, cfg, rng)

    with torch.no_grad():
        obs_values = heatmap_tensor(params_to_tensors(observed), rp, grid, kp).numpy().copy()
        rendered = heatmap_tensor(params_to_tensors(params), rp, grid, kp).numpy()
    thresholds = (mask_threshold(rendered, w.top_fraction), mask_threshold(obs_values, w.top_fraction))

    def loss_of(x: ParamVector) -> float:
        with torch.no_grad():
            return float(total_loss_tensor(params_to_tensors(x.to_params()), obs_values,
                                           sk, rp, grid, kp, w, thresholds).item())

    tensors = params_to_tensors(params, requires_grad=True)
    loss = total_loss_tensor(tensors, obs_values, sk, rp, grid, kp, w, thresholds)
    loss.backward()
    analytic = ParamVector.from_params(grads_to_params(tensors)).values
    x = ParamVector.from_params(params)
    base = abs(float(loss.item()))

    result = {"max_rel_err": 0.0, "worst": None, "compared": 0,
              "below_threshold": 0, "kinks": 0, "noise_floored": 0}
    coords = rng.choice(len(x), size=min(count, len(x)), replace=False)
    for idx in sorted(int(c) for c in coords):
        h = x.step_size(idx, cfg.relative_step)
        coarse = finite_difference_oracle(loss_of, x, idx, h)
        fine = finite_difference_oracle(loss_of, x, idx, h / 2)
        g = float(analytic[idx])
        scale = max(abs(g), abs(fine))
        if scale <= cfg.min_gradient:
            result["below_threshold"] += 1
            continue
        # Below this denominator the finite difference is dominated by rounding
        noise_floor = ROUNDING_FACTOR * MACHINE_EPS * max(base, 1.0) / (h / 2) / (0.5 * cfg.tolerance)
        if noise_floor > scale:
            result["noise_floored"] += 1
            scale = noise_floor
        if abs(coarse - fine) > cfg.tolerance * scale:
            result["kinks"] += 1
            continue
        error = abs(g - fine) / scale
        result["compared"] += 1
        if result["worst"] is None or error > result["max_rel_err"]:
            joint, name, component = x.coordinate(idx)
            result["max_rel_err"] = error
            result["worst"] = {
                "scene": index, "joint": sk.joint_names[joint], "field": name,
                "component": component, "analytic": g, "finite_difference": fine,
            }
    logger.debug(f"Gradcheck scene {index}: {result['compared']} compared, max rel err {result['max_rel_err']:.3g}")
    return result


def gradcheck(
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    w: LossWeights = LossWeights(),
    cfg: GradcheckConfig = GradcheckConfig(),
    threads: int = 1,
) -> GradcheckReport:
    """
    Check total-loss gradients against finite differences.

    `cfg.count` coordinates are spread over `cfg.scenes` random scenes.
    Mask thresholds are frozen at each scene's base point. Coordinates
    where steps h and h/2 disagree (kinks) are excluded and counted. Where
    rounding noise of the finite difference would exceed the tolerance, the
    relative error is taken against that noise level instead of |g|; such
    coordinates are still compared and reported as noise_floored.

    Returns:
        GradcheckReport; passed iff max_rel_err <= cfg.tolerance
    """
    report = GradcheckReport(requested=cfg.count, tolerance=cfg.tolerance)
    if cfg.count == 0:
        logger.info("Gradcheck with count=0: vacuous pass")
        return report

    per_scene = [cfg.count // cfg.scenes + (1 if s < cfg.count % cfg.scenes else 0) for s in range(cfg.scenes)]
    jobs = [(s, k) for s, k in enumerate(per_scene) if k > 0]

    def run(job):
        return _check_scene(job[0], job[1], sk, rp, grid, kp, w, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    for result in results:
        report.compared += result["compared"]
        report.below_threshold += result["below_threshold"]
        report.kinks_excluded += result["kinks"]
        report.noise_floored += result["noise_floored"]
        report.per_scene_max.append(result["max_rel_err"])
        if result["worst"] is not None and (report.worst_coordinate is None or result["max_rel_err"] > report.max_rel_err):
            report.max_rel_err = result["max_rel_err"]
            report.worst_coordinate = result["worst"]

    report.passed = report.max_rel_err <= cfg.tolerance and math.isfinite(report.max_rel_err)
    log = logger.success if report.passed else logger.error
    log(
        f"Gradcheck {'passed' if report.passed else 'FAILED'}: max rel err {report.max_rel_err:.3g} "
        f"over {report.compared} coordinates ({report.kinks_excluded} kinks, "
        f"{report.below_threshold} below threshold excluded; {report.noise_floored} compared against the rounding floor)"
    )
    return report
