"""
Differentiable FMCW forward model for Gaussian scatterers.
"""

from .kernels import RenderKernelParams
from .modulations import signal_modulation, doppler_modulation, antenna_phase, path_loss, beat_phase
from .render import (
    render, render_params, render_field, render_with_gradients, check_coverage,
    heatmap_tensor, field_tensor, params_to_tensors, tensors_to_params, grads_to_params,
)

__all__ = [
    "RenderKernelParams",
    "signal_modulation", "doppler_modulation", "antenna_phase", "path_loss", "beat_phase",
    "render", "render_params", "render_field", "render_with_gradients", "check_coverage",
    "heatmap_tensor", "field_tensor", "params_to_tensors", "tensors_to_params", "grads_to_params",
]
