"""
Differentiable Heatmap Renderer
Rasterizes Gaussian scatterers into a range x Doppler x angle heatmap.

Each scatterer contributes a complex term

    beta * path_loss * M_s * M_d * M_ph * K_r(k) * K_v(m) * Phi(m) * K_a(n)

and the heatmap is the magnitude of the summed field. The computation runs in
torch (float64 / complex128) so reverse accumulation gives exact gradients
with respect to every scatterer parameter.
"""

import math
from typing import Dict, Optional, Sequence

import numpy as np
import torch
from loguru import logger

from src.core.exceptions import DomainError, RenderError, ShapeError
from src.core.types import SPEED_OF_LIGHT, Heatmap, HeatmapGrid, RadarParams
from src.dipr.joint import DiprFrame
from src.dipr.params import PARAM_FIELDS, FrameParams
from .kernels import RenderKernelParams

DTYPE = torch.float64
TWO_PI = 2.0 * math.pi

TensorParams = Dict[str, torch.Tensor]


def params_to_tensors(params: FrameParams, requires_grad: bool = False) -> TensorParams:
    """Copy packed parameters into float64 leaf tensors."""
    return {
        name: torch.tensor(value, dtype=DTYPE, requires_grad=requires_grad)
        for name, value in params.items()
    }


def tensors_to_params(tensors: TensorParams) -> FrameParams:
    return FrameParams(**{name: tensors[name].detach().cpu().numpy().copy() for name in PARAM_FIELDS})


def grads_to_params(tensors: TensorParams) -> FrameParams:
    """Gradient set of leaf tensors; parameters outside the graph get zeros."""
    return FrameParams(**{
        name: (np.zeros(tuple(t.shape)) if t.grad is None else t.grad.detach().cpu().numpy().copy())
        for name, t in ((name, tensors[name]) for name in PARAM_FIELDS)
    })


def check_coverage(
    params: FrameParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams,
    names: Optional[Sequence[str]] = None,
):
    """
    Verify every scatterer is renderable on the grid.

    Raises:
        DomainError: If a scatterer is closer than r_min to the radar
        RenderError: If a scatterer is behind the array or outside range/angle coverage
    """
    positions = params.positions
    if positions.size and not np.all(np.isfinite(positions)):
        raise DomainError("Scatterer positions must be finite")
    if np.any(np.linalg.norm(params.rotations, axis=1) == 0):
        raise DomainError("Quaternion with zero norm cannot be normalized")

    for i, p in enumerate(positions):
        label = names[i] if names is not None and i < len(names) else f"joint {i}"
        r = float(np.linalg.norm(p))
        if r < kp.r_min_m:
            raise DomainError(f"{label} at range {r:.4f} m is below r_min={kp.r_min_m} m")
        if p[0] <= 0:
            raise RenderError(label, f"behind the array (x={p[0]:.4f} m)")
        if not grid.covers("range", r):
            low, high = grid.coverage("range")
            raise RenderError(label, f"range {r:.4f} m outside [{low}, {high})")
        az = math.atan2(p[1], p[0])
        if not grid.covers("angle", az):
            low, high = grid.coverage("angle")
            raise RenderError(label, f"azimuth {az:.4f} rad outside [{low}, {high})")


def _rotation_matrices(q: torch.Tensor) -> torch.Tensor:
    q = q / torch.linalg.norm(q, dim=1, keepdim=True)
    w, x, y, z = q.unbind(dim=1)
    rows = [
        torch.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], dim=1),
        torch.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], dim=1),
        torch.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], dim=1),
    ]
    return torch.stack(rows, dim=1)


def _gaussian(centers: torch.Tensor, mean: torch.Tensor, sigma: torch.Tensor, truncation: float) -> torch.Tensor:
    """(N, bins) truncated Gaussian kernel, peak value 1."""
    u = (centers[None, :] - mean[:, None]) / sigma[:, None]
    inside = (u.abs() <= truncation).to(DTYPE)
    return torch.exp(-0.5 * u * u) * inside


def _doppler_envelope(
    features: torch.Tensor, v_r: torch.Tensor, grid: HeatmapGrid
) -> torch.Tensor:
    """Doppler features resampled onto the grid, centered on each scatterer's Doppler bin."""
    n_features = features.shape[1]
    center = (v_r - grid.doppler_min_mps) / grid.doppler_res_mps - 0.5
    m = torch.arange(grid.doppler_bins, dtype=DTYPE)
    u = m[None, :] - center[:, None] + n_features // 2
    valid = ((u >= 0) & (u <= n_features - 1)).to(DTYPE)
    u = u.clamp(0, n_features - 1)
    k0 = torch.floor(u).clamp(max=n_features - 2)
    t = u - k0
    k0 = k0.long()
    left = torch.gather(features, 1, k0)
    right = torch.gather(features, 1, k0 + 1)
    return ((1 - t) * left + t * right) * valid


def joint_terms(t: TensorParams, rp: RadarParams, grid: HeatmapGrid, kp: RenderKernelParams):
    """
    Per-scatterer factors of the forward model.

    Returns:
        (amplitude (N,) complex, K_r (N,R), K_v*Phi (N,V), K_a (N,A))
    """
    p = t["positions"]
    r = torch.linalg.norm(p, dim=1)
    rho = torch.sqrt(p[:, 0] ** 2 + p[:, 1] ** 2)
    az = torch.atan2(p[:, 1], p[:, 0])
    el = torch.atan2(p[:, 2], rho)
    radial = p / r[:, None]
    v_r = (t["velocities"] * radial).sum(dim=1)

    rot = _rotation_matrices(t["rotations"])
    rs = rot * t["scales"][:, None, :]
    cov = rs @ rs.transpose(1, 2)
    tangent = torch.stack([-p[:, 1] / rho, p[:, 0] / rho, torch.zeros_like(rho)], dim=1)
    var_radial = torch.einsum("ni,nij,nj->n", radial, cov, radial)
    var_tangent = torch.einsum("ni,nij,nj->n", tangent, cov, tangent)

    sigma_r = torch.clamp(torch.sqrt(var_radial), min=kp.range_sigma_floor_bins * grid.range_res_m)
    sigma_a = torch.clamp(torch.atan(torch.sqrt(var_tangent) / r), min=kp.angle_sigma_floor_bins * grid.angle_res_rad)
    sigma_v = torch.full_like(r, kp.doppler_sigma_floor_bins * grid.doppler_res_mps)

    range_centers = torch.tensor(grid.centers("range"), dtype=DTYPE)
    doppler_centers = torch.tensor(grid.centers("doppler"), dtype=DTYPE)
    angle_centers = torch.tensor(grid.centers("angle"), dtype=DTYPE)

    k_r = _gaussian(range_centers, r, sigma_r, kp.truncation_sigmas)
    k_a = _gaussian(angle_centers, az, sigma_a, kp.truncation_sigmas)
    k_v = _gaussian(doppler_centers, v_r, sigma_v, kp.truncation_sigmas)
    doppler = k_v * _doppler_envelope(t["doppler_features"], v_r, grid)

    magnitude = t["opacities"]
    if kp.enable_path_loss:
        magnitude = magnitude / r ** 4

    phase = torch.zeros_like(r)
    if kp.enable_signal_modulation:
        phase = phase + TWO_PI * 4.0 * rp.chirp_slope * r * r / SPEED_OF_LIGHT ** 2
    if kp.enable_doppler_modulation:
        phase = phase + TWO_PI * 2.0 * v_r / rp.wavelength_m
    if kp.enable_antenna_phase:
        phase = phase + TWO_PI * (
            rp.antenna_spacing_az_m * torch.sin(az) + rp.antenna_spacing_el_m * torch.sin(el)
        ) / rp.wavelength_m

    amplitude = magnitude * torch.exp(1j * phase)
    return amplitude, k_r, doppler, k_a


def field_tensor(t: TensorParams, rp: RadarParams, grid: HeatmapGrid, kp: RenderKernelParams) -> torch.Tensor:
    """Coherent complex field C of shape grid.shape."""
    amplitude, k_r, doppler, k_a = joint_terms(t, rp, grid, kp)
    field = torch.zeros(grid.shape, dtype=torch.complex128)
    # Fixed joint order keeps the sum bit-identical across thread counts
    for i in range(amplitude.shape[0]):
        separable = k_r[i][:, None, None] * doppler[i][None, :, None] * k_a[i][None, None, :]
        field = field + amplitude[i] * separable.to(torch.complex128)
    return field


def heatmap_tensor(t: TensorParams, rp: RadarParams, grid: HeatmapGrid, kp: RenderKernelParams) -> torch.Tensor:
    """Rendered heatmap H (real, shape grid.shape), differentiable in t."""
    if kp.coherent:
        return torch.abs(field_tensor(t, rp, grid, kp))

    amplitude, k_r, doppler, k_a = joint_terms(t, rp, grid, kp)
    power = torch.zeros(grid.shape, dtype=DTYPE)
    for i in range(amplitude.shape[0]):
        separable = k_r[i][:, None, None] * doppler[i][None, :, None] * k_a[i][None, None, :]
        power = power + (amplitude[i].abs() * separable) ** 2
    positive = power > 0
    return torch.where(positive, torch.sqrt(torch.where(positive, power, torch.ones_like(power))), power)


def render_field(
    params: FrameParams,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    names: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Complex field before the magnitude, as a complex128 array."""
    check_coverage(params, grid, kp, names)
    with torch.no_grad():
        return field_tensor(params_to_tensors(params), rp, grid, kp).numpy().copy()


def render_params(
    params: FrameParams,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    names: Optional[Sequence[str]] = None,
) -> Heatmap:
    """
    Render an arbitrary set of Gaussian scatterers.

    Args:
        params: Packed scatterer parameters
        rp: Radar configuration
        grid: Output grid
        kp: Kernel widths and model switches
        names: Optional scatterer labels for error messages

    Returns:
        Heatmap on grid
    """
    check_coverage(params, grid, kp, names)
    with torch.no_grad():
        values = heatmap_tensor(params_to_tensors(params), rp, grid, kp).numpy().copy()
    return Heatmap(grid, values)


def render(
    frame: DiprFrame,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams = RenderKernelParams(),
    names: Optional[Sequence[str]] = None,
) -> Heatmap:
    """Render a DIPR frame into a heatmap."""
    return render_params(frame.to_params(), rp, grid, kp, names)


def render_with_gradients(
    frame: DiprFrame,
    rp: RadarParams,
    grid: HeatmapGrid,
    kp: RenderKernelParams,
    adjoint,
    names: Optional[Sequence[str]] = None,
) -> FrameParams:
    """
    Gradient of <adjoint, H> with respect to every joint parameter.

    Args:
        frame: Frame to differentiate at
        rp, grid, kp: Forward-model configuration
        adjoint: Real array of shape grid.shape

    Returns:
        FrameParams holding d<adjoint, H>/d(theta) per field
    """
    adjoint = np.asarray(adjoint, dtype=np.float64)
    if adjoint.shape != grid.shape:
        raise ShapeError(f"Adjoint has shape {adjoint.shape}, grid expects {grid.shape}")

    params = frame.to_params()
    check_coverage(params, grid, kp, names)
    tensors = params_to_tensors(params, requires_grad=True)
    h = heatmap_tensor(tensors, rp, grid, kp)
    objective = (torch.tensor(adjoint, dtype=DTYPE) * h).sum()
    objective.backward()
    logger.debug(f"Rendered gradients for {params.num_joints} joints, objective={objective.item():.6g}")
    return grads_to_params(tensors)
