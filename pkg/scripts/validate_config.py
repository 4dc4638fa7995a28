#!/usr/bin/env python3
"""
Configuration Validator
Validates that config.yaml builds every pipeline component and flags
unusual values.
"""

import argparse
import sys
from pathlib import Path

from loguru import logger

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cfar import CfarConfig
from src.core import ConfigError, HeatmapGrid, RadarParams, load_config, load_skeleton
from src.dipr import InitConfig
from src.fitter import ExtractionConfig, FitConfig
from src.grad import GradcheckConfig
from src.renderer import RenderKernelParams


def validate_forward_model(config):
    """Radar, grid and kernel parameters."""
    errors, warnings = [], []
    try:
        RadarParams.from_config(config)
        grid = HeatmapGrid.from_config(config)
        RenderKernelParams.from_config(config)
        init = InitConfig.from_config(config)
    except ConfigError as e:
        return [str(e)], warnings

    anchor_range = sum(c * c for c in init.default_anchor_m) ** 0.5
    if not grid.covers("range", anchor_range):
        errors.append(f"initialization.default_anchor_m (range {anchor_range:.2f} m) is outside the grid range coverage")
    if grid.range_bins < 8 or grid.angle_bins < 8:
        warnings.append(f"grid {grid.shape} is very coarse; fits will be poorly constrained")
    return errors, warnings


def validate_fitting(config):
    """Fit, loss, extraction and initialization settings."""
    errors, warnings = [], []
    try:
        fit = FitConfig.from_config(config)
        ExtractionConfig.from_config(config)
        InitConfig.from_config(config)
    except ConfigError as e:
        return [str(e)], warnings

    w = fit.loss_weights
    if (w.lambda1, w.lambda2, w.top_fraction) != (0.5, 0.3, 0.1):
        warnings.append(
            f"loss weights lambda1={w.lambda1}, lambda2={w.lambda2}, top_fraction={w.top_fraction} "
            f"differ from the defaults 0.5, 0.3, 0.1"
        )
    if fit.max_iters < 50:
        warnings.append(f"fit.max_iters={fit.max_iters} is low; fits may stop before converging")
    return errors, warnings


def validate_detection(config):
    """CFAR and gradcheck settings."""
    errors, warnings = [], []
    try:
        cfar = CfarConfig.from_config(config)
        grid = HeatmapGrid.from_config(config)
        GradcheckConfig.from_config(config)
        GradcheckConfig.grid_from_config(config)
    except ConfigError as e:
        return [str(e)], warnings

    (_, outer_r), (_, outer_a) = cfar.half_widths()
    if 2 * outer_r + 1 > grid.range_bins or 2 * outer_a + 1 > grid.angle_bins:
        errors.append(f"CFAR window is larger than the grid {grid.shape}")
    return errors, warnings


def validate_skeleton(config):
    errors, warnings = [], []
    try:
        sk = load_skeleton(config.get("skeleton_path"))
    except (ConfigError, OSError) as e:
        return [str(e)], warnings
    if sk.num_joints != 14:
        warnings.append(f"skeleton has {sk.num_joints} joints; the shipped scenes assume 14")
    return errors, warnings


def validate_logging_config(config):
    """Validate logging configuration."""
    errors = []
    warnings = []

    logging = config.get('logging', {}) or {}

    level = str(logging.get('level', 'INFO')).upper()
    valid_levels = ['TRACE', 'DEBUG', 'INFO', 'SUCCESS', 'WARNING', 'ERROR', 'CRITICAL']
    if level not in valid_levels:
        errors.append(f"Invalid logging.level: {level} (must be one of {valid_levels})")

    return errors, warnings


def main():
    """Main validation function."""
    parser = argparse.ArgumentParser(description="Validate an M-GS configuration file")
    parser.add_argument("--config", default=str(Path(__file__).parent.parent / "config" / "config.yaml"))
    args = parser.parse_args()

    logger.info("=" * 60)
    logger.info("Configuration Validation")
    logger.info("=" * 60)

    try:
        config = load_config(args.config)
    except ConfigError:
        sys.exit(2)

    logger.success("Config file loaded successfully")

    all_errors = []
    all_warnings = []

    validators = [
        ("Forward Model", validate_forward_model),
        ("Fitting", validate_fitting),
        ("Detection and Gradcheck", validate_detection),
        ("Skeleton", validate_skeleton),
        ("Logging Configuration", validate_logging_config),
    ]

    for section_name, validator_func in validators:
        logger.info(f"Validating {section_name}...")
        errors, warnings = validator_func(config)

        for error in errors:
            logger.error(f"  {error}")
        for warning in warnings:
            logger.warning(f"  {warning}")
        all_errors.extend(errors)
        all_warnings.extend(warnings)

        if not errors and not warnings:
            logger.success(f"  {section_name} OK")

    logger.info("=" * 60)
    if all_errors:
        logger.error(f"Validation failed with {len(all_errors)} error(s) and {len(all_warnings)} warning(s)")
        sys.exit(2)
    logger.success(f"Configuration valid ({len(all_warnings)} warning(s))")


if __name__ == "__main__":
    main()
