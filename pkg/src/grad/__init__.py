"""
Gradient verification: flat parameter vectors, finite differences and the
randomized gradient check.
"""

from .check import GradcheckConfig, GradcheckReport, gradcheck, random_scene
from .param_vector import FIELD_WIDTHS, TYPICAL_SCALES, ParamVector, finite_difference_oracle

__all__ = [
    "FIELD_WIDTHS",
    "TYPICAL_SCALES",
    "GradcheckConfig",
    "GradcheckReport",
    "ParamVector",
    "finite_difference_oracle",
    "gradcheck",
    "random_scene",
]
