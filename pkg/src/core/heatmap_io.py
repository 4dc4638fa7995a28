"""
MGSH Heatmap Files
Binary layout: b"MGSH", little-endian u32 version, R, V, A, then R*V*A
little-endian float32 values (angle innermost). Axis metadata lives in a
`<path>.meta.json` sidecar.
"""

import json
from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from .exceptions import ConfigError, DomainError, HeatmapFormatError, HeatmapWriteError
from .types import Heatmap, HeatmapGrid

MAGIC = b"MGSH"
VERSION = 1
HEADER_DTYPE = np.dtype("<u4")
VALUE_DTYPE = np.dtype("<f4")
HEADER_BYTES = len(MAGIC) + 4 * HEADER_DTYPE.itemsize


def meta_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def heatmap_write(h: Heatmap, path: Union[str, Path]):
    """
    Write a heatmap and its metadata sidecar.

    Args:
        h: Heatmap to store (values are narrowed to float32)
        path: Destination file; its directory must exist

    Raises:
        HeatmapWriteError: On any I/O failure
    """
    path = Path(path)
    header = np.array([VERSION, *h.grid.shape], dtype=HEADER_DTYPE)
    payload = np.ascontiguousarray(h.values, dtype=VALUE_DTYPE)

    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(header.tobytes())
            f.write(payload.tobytes())
        with open(meta_path(path), "w") as f:
            json.dump(h.grid.to_dict(), f, indent=2)
    except OSError as e:
        raise HeatmapWriteError(path, e.strerror or str(e)) from e

    logger.debug(f"Wrote heatmap {h.grid.shape} to {path}")


def heatmap_read(path: Union[str, Path]) -> Heatmap:
    """
    Read a heatmap written by heatmap_write.

    Raises:
        HeatmapFormatError: Bad magic, truncated payload or missing/invalid sidecar
        OSError: If the binary file cannot be opened
    """
    path = Path(path)
    with open(path, "rb") as f:
        blob = f.read()

    if len(blob) < HEADER_BYTES or blob[:len(MAGIC)] != MAGIC:
        raise HeatmapFormatError(f"{path}: missing MGSH magic")

    version, r, v, a = np.frombuffer(blob, dtype=HEADER_DTYPE, count=4, offset=len(MAGIC))
    if version != VERSION:
        raise HeatmapFormatError(f"{path}: unsupported version {version}")

    payload = blob[HEADER_BYTES:]
    expected = int(r) * int(v) * int(a)
    if len(payload) != expected * VALUE_DTYPE.itemsize:
        found = len(payload) / VALUE_DTYPE.itemsize
        raise HeatmapFormatError(f"{path}: header says {r}x{v}x{a} = {expected} values, found {found:g}")

    sidecar = meta_path(path)
    try:
        with open(sidecar, "r") as f:
            grid = HeatmapGrid(**json.load(f))
    except FileNotFoundError:
        raise HeatmapFormatError(f"{path}: missing metadata sidecar {sidecar}")
    except (json.JSONDecodeError, TypeError, ConfigError) as e:
        raise HeatmapFormatError(f"{sidecar}: invalid metadata ({e})")

    if grid.shape != (r, v, a):
        raise HeatmapFormatError(f"{path}: sidecar grid {grid.shape} disagrees with header {(r, v, a)}")

    values = np.frombuffer(payload, dtype=VALUE_DTYPE).astype(np.float64).reshape(grid.shape)
    try:
        return Heatmap(grid, values)
    except DomainError as e:
        raise HeatmapFormatError(f"{path}: {e}")
