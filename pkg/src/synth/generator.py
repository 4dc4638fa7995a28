"""
Synthetic Scene Generator
Renders ground-truth motion into heatmaps with static clutter, multipath
ghosts and complex Gaussian noise at a requested SNR.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from src.core.exceptions import DomainError, SceneError
from src.core.types import Heatmap, HeatmapGrid, RadarParams, Skeleton
from src.dipr.initialization import InitConfig
from src.dipr.joint import doppler_envelope
from src.dipr.params import FrameParams
from src.geometry.transforms import spherical_to_cartesian_batch
from src.renderer.kernels import RenderKernelParams
from src.renderer.render import check_coverage, render_field, render_params
from .ground_truth import GroundTruthSequence, ground_truth_frames
from .scene import SceneSpec, trajectory

CLUTTER_STREAM = 0xC1
MAX_CLUTTER_DRAWS = 10000


def snr_of(clean: Heatmap, noisy: Heatmap) -> Optional[float]:
    """
    10 log10(clean energy / residual energy) in dB.

    Returns:
        None when noisy equals clean (infinite SNR)

    Raises:
        ShapeError: If the grids differ
        DomainError: If the clean heatmap has zero energy
    """
    clean.require_same_grid(noisy)
    signal = float(np.sum(clean.values ** 2))
    if signal == 0:
        raise DomainError("SNR undefined for a zero-energy clean heatmap")
    residual = float(np.sum((noisy.values - clean.values) ** 2))
    if residual == 0:
        return None
    return 10.0 * math.log10(signal / residual)


def _sample_clutter(spec: SceneSpec, grid: HeatmapGrid, poses: np.ndarray) -> np.ndarray:
    """Static scatterers uniform over coverage, outside the body shell in every frame."""
    if spec.clutter_points == 0:
        return np.zeros((0, 3))
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, CLUTTER_STREAM]))
    r_low, r_high = grid.coverage("range")
    a_low, a_high = grid.coverage("angle")
    body = poses.reshape(-1, 3)

    accepted = []
    draws = 0
    while len(accepted) < spec.clutter_points and draws < MAX_CLUTTER_DRAWS:
        draws += 1
        r = rng.uniform(r_low, r_high)
        az = rng.uniform(a_low, a_high)
        el = rng.uniform(-spec.clutter_elevation_rad, spec.clutter_elevation_rad)
        point = spherical_to_cartesian_batch(r, az, el)
        if np.min(np.linalg.norm(body - point, axis=1)) >= spec.body_shell_m:
            accepted.append(point)
    if len(accepted) < spec.clutter_points:
        logger.warning(f"Placed {len(accepted)} of {spec.clutter_points} clutter points outside the body shell")
    return np.array(accepted).reshape(-1, 3)


def clutter_params(spec: SceneSpec, grid: HeatmapGrid, kp: RenderKernelParams,
                   poses: np.ndarray, init_cfg: InitConfig = InitConfig()) -> Optional[FrameParams]:
    """Clutter scatterers plus one multipath ghost each (ghosts outside coverage are dropped)."""
    points = _sample_clutter(spec, grid, poses)
    if len(points) == 0:
        return None

    ghosts = points * spec.ghost_range_ratio
    r_ghost = np.linalg.norm(ghosts, axis=1)
    az_ghost = np.arctan2(ghosts[:, 1], ghosts[:, 0])
    r_low, r_high = grid.coverage("range")
    a_low, a_high = grid.coverage("angle")
    keep = (r_ghost >= r_low) & (r_ghost < r_high) & (az_ghost >= a_low) & (az_ghost < a_high)
    if not np.all(keep):
        logger.warning(f"Dropped {int(np.sum(~keep))} multipath ghosts outside grid coverage")
    scatterers = np.concatenate([points, ghosts[keep]])

    n = len(scatterers)
    envelope = doppler_envelope(init_cfg.doppler_bins, init_cfg.doppler_sigma_bins)
    params = FrameParams(
        positions=scatterers,
        scales=np.full((n, 3), spec.clutter_scale_m),
        rotations=np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)),
        velocities=np.zeros((n, 3)),
        opacities=np.full(n, spec.clutter_intensity_rel * init_cfg.opacity),
        doppler_features=np.tile(envelope, (n, 1)),
    )
    check_coverage(params, grid, kp)
    return params


def calibrate_noise(clean_field: np.ndarray, unit_noise: np.ndarray, snr_db: float) -> float:
    """Noise amplitude whose |field + sigma * noise| reaches snr_db against |field|."""
    clean = np.abs(clean_field)
    signal = float(np.sum(clean ** 2))
    if signal == 0:
        raise DomainError("Cannot calibrate noise against an all-zero scene")

    def excess(log_sigma: float) -> float:
        noisy = np.abs(clean_field + math.exp(log_sigma) * unit_noise)
        return 10.0 * math.log10(signal / float(np.sum((noisy - clean) ** 2))) - snr_db

    guess = math.log(math.sqrt(signal / (clean.size * 10 ** (snr_db / 10.0))))
    low, high = guess - 8.0, guess + 8.0
    if excess(low) * excess(high) > 0:
        logger.warning(f"SNR calibration bracket failed for {snr_db} dB; using the energy estimate")
        return math.exp(guess)
    return math.exp(brentq(excess, low, high, xtol=1e-10))


def _frame_heatmap(
    t: int,
    body: FrameParams,
    clutter: Optional[FrameParams],
    spec: SceneSpec,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams,
) -> Heatmap:
    params = body if clutter is None else body.concat(clutter)
    if spec.noise_snr_db is None:
        return render_params(params, rp, grid, kp)

    if kp.coherent:
        field = render_field(params, rp, grid, kp)
    else:
        field = render_params(params, rp, grid, kp).values.astype(np.complex128)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, t]))
    unit = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) / math.sqrt(2.0)
    sigma = calibrate_noise(field, unit, spec.noise_snr_db)
    return Heatmap(grid, np.abs(field + sigma * unit))


def generate_scene(
    spec: SceneSpec,
    sk: Skeleton,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    init_cfg: InitConfig = InitConfig(),
    threads: int = 1,
) -> Tuple[List[Heatmap], GroundTruthSequence]:
    """
    Generate heatmaps and ground truth for a scene.

    Args:
        spec: Scene specification
        sk: Skeleton driven by the motion program
        rp, grid, kp: Forward-model configuration
        init_cfg: Joint opacity and Doppler envelope of the rendered body
        threads: Frames rendered concurrently (outputs do not depend on it)

    Returns:
        (heatmaps, ground truth)

    Raises:
        SceneError: If a joint leaves the grid coverage, naming the frame
    """
    poses, velocities = trajectory(spec, sk)
    truth = GroundTruthSequence(poses, velocities, spec.dt_s, sk.joint_names)
    bodies = [frame.to_params() for frame in ground_truth_frames(truth, sk, init_cfg)]

    for t, body in enumerate(bodies):
        try:
            check_coverage(body, grid, kp, sk.joint_names)
        except DomainError as e:
            raise SceneError(t, str(e))

    clutter = clutter_params(spec, grid, kp, poses, init_cfg)

    def build(t: int) -> Heatmap:
        return _frame_heatmap(t, bodies[t], clutter, spec, rp, grid, kp)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            heatmaps = list(pool.map(build, range(spec.frames)))
    else:
        heatmaps = [build(t) for t in range(spec.frames)]

    n_clutter = 0 if clutter is None else clutter.num_joints
    logger.info(
        f"Generated {spec.frames} frames of '{spec.motion}' with {n_clutter} clutter scatterers"
        + ("" if spec.noise_snr_db is None else f" at {spec.noise_snr_db} dB SNR")
    )
    return heatmaps, truth
