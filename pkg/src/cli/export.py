"""
Heatmap Image Export
Writes one 8-bit binary PGM (P5) image per Doppler slice; rows are range
bins, columns are angle bins.
"""

from pathlib import Path
from typing import List, Union

import numpy as np
from loguru import logger

from src.core.exceptions import HeatmapWriteError
from src.core.types import Heatmap

SLICE_PATTERN = "slice_{:03d}.pgm"


def to_gray(image: np.ndarray) -> np.ndarray:
    """Min-max normalize to 0..255; a constant image maps to all zeros."""
    low, high = float(image.min()), float(image.max())
    if high <= low:
        return np.zeros(image.shape, dtype=np.uint8)
    scaled = (image - low) / (high - low) * 255.0
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def write_pgm(image: np.ndarray, path: Union[str, Path]):
    """Write a 2-D uint8 array as binary PGM."""
    path = Path(path)
    rows, cols = image.shape
    try:
        with open(path, "wb") as f:
            f.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
            f.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())
    except OSError as e:
        raise HeatmapWriteError(path, e.strerror or str(e)) from e


def export_slices(h: Heatmap, out_dir: Union[str, Path]) -> List[Path]:
    """
    Export every Doppler slice of a heatmap.

    Args:
        h: Heatmap to export
        out_dir: Output directory (created if missing)

    Returns:
        Written image paths, in Doppler order
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for d in range(h.grid.doppler_bins):
        path = out_dir / SLICE_PATTERN.format(d)
        write_pgm(to_gray(h.values[:, d, :]), path)
        paths.append(path)
    logger.info(f"Exported {len(paths)} Doppler slices to {out_dir}")
    return paths
