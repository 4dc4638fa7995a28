"""
mmWave Gaussian splatting: differentiable radar rendering and pose fitting.
"""

__version__ = "0.1.0"
