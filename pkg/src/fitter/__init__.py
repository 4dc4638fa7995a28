"""
M-GS fitting: initialization, optimization, sweeps and DIPR re-rendering.
"""

from .config import ExtractionConfig, FitConfig, LR_FIELDS
from .fitter import (
    FitReport, MGSFitter, initial_frame, project_into_coverage, project_params, fit_frame, fit_sequence,
    dipr_to_heatmap, dipr_to_pointcloud,
)
from .sweep import HyperparameterSweep, MODULATION_FLAGS, SWEEP_PARAMETERS, parse_sweep_values, sweep_from_config

__all__ = [
    "ExtractionConfig", "FitConfig", "LR_FIELDS",
    "FitReport", "MGSFitter", "initial_frame", "project_into_coverage", "project_params", "fit_frame", "fit_sequence",
    "dipr_to_heatmap", "dipr_to_pointcloud",
    "HyperparameterSweep", "MODULATION_FLAGS", "SWEEP_PARAMETERS", "parse_sweep_values", "sweep_from_config",
]
