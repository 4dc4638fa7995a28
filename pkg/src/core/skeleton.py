"""
Skeleton Configuration
Loads the joint tree and T-pose from YAML.
"""

from pathlib import Path
from typing import Dict, Optional, Union

from loguru import logger

from .config import load_config
from .exceptions import ConfigError
from .types import Skeleton

SHIPPED_SKELETON = Path(__file__).resolve().parents[2] / "config" / "skeleton.yaml"


def skeleton_from_config(config: Dict) -> Skeleton:
    """
    Build a Skeleton from a parsed skeleton document.

    Joints are listed with a name, a T-pose position and an optional
    default scale; edges reference joints by name.
    """
    joints = config.get("joints")
    edges = config.get("edges")
    if not joints or not edges:
        raise ConfigError("Skeleton config needs 'joints' and 'edges'")

    try:
        names = [str(j["name"]) for j in joints]
        tpose = [[float(c) for c in j["tpose"]] for j in joints]
        scales = [float(j.get("scale", 0.08)) for j in joints]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed skeleton joint entry: {e}")

    index = {name: i for i, name in enumerate(names)}
    try:
        edge_indices = [(index[a], index[b]) for a, b in edges]
    except KeyError as e:
        raise ConfigError(f"Skeleton edge references unknown joint {e}")
    except (TypeError, ValueError):
        raise ConfigError("Skeleton edges must be [joint, joint] pairs")

    return Skeleton.from_tpose(names, edge_indices, tpose, scales, root=config.get("root", "pelvis"))


def load_skeleton(path: Optional[Union[str, Path]] = None) -> Skeleton:
    """Load a skeleton file (the shipped 14-joint skeleton by default)."""
    path = Path(path) if path is not None else SHIPPED_SKELETON
    skeleton = skeleton_from_config(load_config(path))
    logger.debug(f"Loaded {skeleton.num_joints}-joint skeleton from {path}")
    return skeleton


def default_skeleton() -> Skeleton:
    """The canonical 14-joint skeleton rooted at the pelvis."""
    return load_skeleton(SHIPPED_SKELETON)
