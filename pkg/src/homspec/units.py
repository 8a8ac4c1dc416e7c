"""Unit bridges between wavelength offsets (nm) and angular-frequency detunings."""

from __future__ import annotations

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import InvalidArgument

FS = 1e-15
NM = 1e-9


def nm_to_angular_detuning(delta_nm, center_wavelength_nm: float, sign: int = 1):
    """Convert a wavelength offset to an angular-frequency detuning (rad/s).

    Uses the small-offset linearization ``2*pi*c*delta / lambda0**2``. With the
    default ``sign=+1`` a positive nm offset maps to a positive detuning; pass
    ``sign=-1`` for the physical (red-shift is lower frequency) orientation.
    """
    if center_wavelength_nm <= 0:
        raise InvalidArgument(f"center wavelength must be positive, got {center_wavelength_nm}")
    if sign not in (1, -1):
        raise InvalidArgument(f"sign must be +1 or -1, got {sign}")
    lam0 = center_wavelength_nm * NM
    return sign * 2.0 * np.pi * SPEED_OF_LIGHT * (np.asarray(delta_nm, dtype=float) * NM) / lam0**2


def angular_detuning_to_nm(nu, center_wavelength_nm: float, sign: int = 1):
    """Inverse of :func:`nm_to_angular_detuning`."""
    if center_wavelength_nm <= 0:
        raise InvalidArgument(f"center wavelength must be positive, got {center_wavelength_nm}")
    if sign not in (1, -1):
        raise InvalidArgument(f"sign must be +1 or -1, got {sign}")
    lam0 = center_wavelength_nm * NM
    return sign * np.asarray(nu, dtype=float) * lam0**2 / (2.0 * np.pi * SPEED_OF_LIGHT) / NM


def nm_width_to_hz(width_nm, center_wavelength_nm: float):
    """Linewidth in nm to ordinary frequency width in Hz, ``c*dlambda/lambda0**2``."""
    if center_wavelength_nm <= 0:
        raise InvalidArgument(f"center wavelength must be positive, got {center_wavelength_nm}")
    lam0 = center_wavelength_nm * NM
    return SPEED_OF_LIGHT * np.asarray(width_nm, dtype=float) * NM / lam0**2
