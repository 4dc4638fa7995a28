"""
Radar Modulation Factors
Per-scatterer phase and amplitude factors of the forward model.
Reference scalar versions; src/renderer/render.py evaluates the same
expressions batched in torch.
"""

import cmath
import math

import numpy as np

from src.core.exceptions import DomainError
from src.core.types import SPEED_OF_LIGHT, RadarParams
from src.geometry.transforms import cartesian_to_spherical, radial_velocity

TWO_PI = 2.0 * math.pi
DEFAULT_R_MIN = 0.1


def _range(p) -> float:
    r = float(np.linalg.norm(np.asarray(p, dtype=np.float64)))
    if r == 0:
        raise DomainError("Modulation undefined at the radar origin")
    return r


def beat_phase(rp: RadarParams, r: float) -> float:
    """2*pi*f0*tau with f0 = 2 S r / c and tau = 2 r / c."""
    f0 = 2.0 * rp.chirp_slope * r / SPEED_OF_LIGHT
    tau = 2.0 * r / SPEED_OF_LIGHT
    return TWO_PI * f0 * tau


def signal_modulation(rp: RadarParams, p) -> complex:
    """Chirp beat-frequency phase factor, |result| = 1."""
    return cmath.exp(1j * beat_phase(rp, _range(p)))


def doppler_modulation(rp: RadarParams, p, v) -> complex:
    """Phase factor of the Doppler shift 2 v_r / lambda."""
    _range(p)
    v_r = radial_velocity(p, v)
    return cmath.exp(1j * TWO_PI * 2.0 * v_r / rp.wavelength_m)


def antenna_phase(rp: RadarParams, p) -> complex:
    """Inter-element phase factor for azimuth and elevation arrays."""
    _, az, el = cartesian_to_spherical(p)
    phase_az = TWO_PI * rp.antenna_spacing_az_m * math.sin(az) / rp.wavelength_m
    phase_el = TWO_PI * rp.antenna_spacing_el_m * math.sin(el) / rp.wavelength_m
    return cmath.exp(1j * phase_az) * cmath.exp(1j * phase_el)


def path_loss(p, r_min: float = DEFAULT_R_MIN) -> float:
    """Two-way attenuation 1 / |p|^4, guarded below r_min."""
    r = float(np.linalg.norm(np.asarray(p, dtype=np.float64)))
    if r < r_min:
        raise DomainError(f"Range {r} m is below the path-loss guard {r_min} m")
    return 1.0 / r ** 4
