"""
Configuration Loading
Reads the YAML configuration files and sets up logging.
"""

import sys
from pathlib import Path
from typing import Dict, Optional, Union

import yaml
from loguru import logger

from .exceptions import ConfigError

DEFAULT_CONFIG_PATH = "config/config.yaml"
DEFAULT_SKELETON_PATH = "config/skeleton.yaml"


def load_config(path: Union[str, Path] = DEFAULT_CONFIG_PATH) -> Dict:
    """
    Load a YAML configuration file.

    Args:
        path: Path to the YAML file

    Returns:
        Parsed configuration (empty dict for an empty file)

    Raises:
        ConfigError: If the file is missing or not valid YAML
    """
    path = Path(path)
    try:
        with open(path, 'r') as f:
            config = yaml.safe_load(f)
    except FileNotFoundError:
        logger.error(f"Config file not found: {path}")
        raise ConfigError(f"Config file not found: {path}")
    except yaml.YAMLError as e:
        logger.error(f"Error parsing config {path}: {e}")
        raise ConfigError(f"Cannot parse {path}: {e}")

    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    return config


def save_yaml(document: Dict, path: Union[str, Path]):
    """Write a document as block-style YAML, keys in insertion order."""
    with open(path, 'w') as f:
        yaml.safe_dump(document, f, sort_keys=False, default_flow_style=None)


def section(config: Dict, name: str) -> Dict:
    """Return a config section, treating a missing or null section as empty."""
    value = config.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"Config section '{name}' must be a mapping")
    return value


def require_positive(name: str, value) -> float:
    """Validate a strictly positive number."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def require_fraction(name: str, value, allow_zero: bool = False) -> float:
    """Validate a ratio in (0, 1] (or [0, 1] when allow_zero)."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    low_ok = value >= 0 if allow_zero else value > 0
    if not (low_ok and value <= 1):
        bounds = "[0, 1]" if allow_zero else "(0, 1]"
        raise ConfigError(f"{name} must be in {bounds}, got {value}")
    return value


def configure_logging(level: str = "INFO", log_file: Optional[str] = None):
    """
    Route loguru output to stderr (and optionally a file).

    Args:
        level: Minimum level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional log file path, rotated at 10 MB
    """
    valid_levels = {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}
    level = str(level).upper()
    if level not in valid_levels:
        raise ConfigError(f"logging.level must be one of {sorted(valid_levels)}, got {level}")

    logger.remove()
    logger.add(sys.stderr, level=level)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(log_file, level=level, rotation="10 MB")


def merge_config(base: Dict, overlay: Dict) -> Dict:
    """Recursively overlay one config on another; overlay values win."""
    merged = dict(base)
    for key, value in (overlay or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged
