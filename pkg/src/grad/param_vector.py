"""
Flat Parameter Vectors
Ordered view of every continuous joint parameter, per joint
p[3], s[3], q[4], v[3], beta, phi[N_d].
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from src.core.exceptions import DomainError, OracleError, ShapeError
from src.dipr.params import PARAM_FIELDS, FrameParams

FIELD_WIDTHS = {"positions": 3, "scales": 3, "rotations": 4, "velocities": 3, "opacities": 1}

# Typical magnitude of each field, used to size finite-difference steps
TYPICAL_SCALES = {
    "positions": 1.0,
    "scales": 0.1,
    "rotations": 1.0,
    "velocities": 1.0,
    "opacities": 1.0,
    "doppler_features": 0.1,
}


def _widths(doppler_bins: int) -> List[Tuple[str, int]]:
    return [(name, FIELD_WIDTHS.get(name, doppler_bins)) for name in PARAM_FIELDS]


@dataclass
class ParamVector:
    """values[k] is the coordinate described by index_map[k] = (joint, field, component)."""

    values: np.ndarray
    num_joints: int
    doppler_bins: int

    def __post_init__(self):
        self.values = np.array(self.values, dtype=np.float64).ravel()
        expected = self.num_joints * (14 + self.doppler_bins)
        if self.values.size != expected:
            raise ShapeError(f"ParamVector for {self.num_joints} joints needs {expected} values, got {self.values.size}")

    def __len__(self) -> int:
        return self.values.size

    @property
    def stride(self) -> int:
        return 14 + self.doppler_bins

    @classmethod
    def from_params(cls, params: FrameParams) -> "ParamVector":
        n = params.num_joints
        blocks = [np.reshape(value, (n, -1)) for _, value in params.items()]
        return cls(np.concatenate(blocks, axis=1).ravel(), n, params.doppler_bins)

    def to_params(self) -> FrameParams:
        rows = self.values.reshape(self.num_joints, self.stride)
        arrays, start = {}, 0
        for name, width in _widths(self.doppler_bins):
            arrays[name] = rows[:, start:start + width].copy()
            start += width
        arrays["opacities"] = arrays["opacities"].ravel()
        return FrameParams(**arrays)

    def index_map(self) -> List[Tuple[int, str, int]]:
        entries = []
        for joint in range(self.num_joints):
            for name, width in _widths(self.doppler_bins):
                entries.extend((joint, name, c) for c in range(width))
        return entries

    def coordinate(self, idx: int) -> Tuple[int, str, int]:
        joint, offset = divmod(int(idx), self.stride)
        for name, width in _widths(self.doppler_bins):
            if offset < width:
                return joint, name, offset
            offset -= width
        raise IndexError(idx)

    def step_size(self, idx: int, relative: float = 1e-6) -> float:
        """relative * max(|x_idx|, typical scale of its field)."""
        _, name, _ = self.coordinate(idx)
        return relative * max(abs(float(self.values[idx])), TYPICAL_SCALES[name])

    def shifted(self, idx: int, delta: float) -> "ParamVector":
        values = self.values.copy()
        values[idx] += delta
        return ParamVector(values, self.num_joints, self.doppler_bins)


def finite_difference_oracle(f: Callable[[ParamVector], float], x: ParamVector, idx: int, h: float) -> float:
    """
    Central difference (f(x + h e) - f(x - h e)) / 2h.

    Raises:
        DomainError: If h is not positive
        OracleError: If either evaluation is not finite
    """
    if not h > 0:
        raise DomainError(f"Finite-difference step must be positive, got {h}")
    ahead = float(f(x.shifted(idx, h)))
    behind = float(f(x.shifted(idx, -h)))
    if not (math.isfinite(ahead) and math.isfinite(behind)):
        raise OracleError(f"Non-finite evaluation at coordinate {idx}: f(+h)={ahead}, f(-h)={behind}")
    return (ahead - behind) / (2.0 * h)
