"""
Gaussian joint representation: primitives, frames, initialization, documents.
"""

from .params import FrameParams, PARAM_FIELDS
from .joint import (
    GaussianJoint, DiprFrame, covariance, gaussian_density, disturbance,
    quaternion_to_rotation, doppler_envelope,
)
from .initialization import InitConfig, init_from_coarse, tpose_frame
from .serialization import frame_to_document, frame_from_document, save_frame, load_frame

__all__ = [
    "FrameParams", "PARAM_FIELDS",
    "GaussianJoint", "DiprFrame", "covariance", "gaussian_density", "disturbance",
    "quaternion_to_rotation", "doppler_envelope",
    "InitConfig", "init_from_coarse", "tpose_frame",
    "frame_to_document", "frame_from_document", "save_frame", "load_frame",
]
