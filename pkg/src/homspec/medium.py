"""Resonant media as complex transfer functions H(omega0 + nu)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InvalidArgument
from .spectral import ComplexSpectrum, SpectralGrid
from .units import FS, nm_to_angular_detuning, nm_width_to_hz

__all__ = [
    "LorentzLine",
    "Identity",
    "Lorentzian",
    "Tabulated",
    "Medium",
    "nm_to_angular_detuning",
    "transfer_function",
    "intensity_transmission",
    "optical_depth",
    "thin_sample_t2_from_fwhm",
    "thin_sample_t2_from_nm",
]


@dataclass(frozen=True)
class LorentzLine:
    """One two-level resonance.

    ``detuning_nm`` is the resonance offset from the biphoton center in nm,
    ``optical_thickness`` is alpha*L, and ``t2`` is the phase relaxation time
    in seconds.
    """

    detuning_nm: float
    optical_thickness: float
    t2: float

    def __post_init__(self):
        if self.optical_thickness < 0:
            raise InvalidArgument("optical thickness must be non-negative (no gain media)")
        if not self.t2 > 0:
            raise InvalidArgument("t2 must be positive")

    @property
    def t2_fs(self) -> float:
        return self.t2 / FS

    @classmethod
    def from_fs(cls, detuning_nm: float, alpha_l: float, t2_fs: float) -> "LorentzLine":
        return cls(float(detuning_nm), float(alpha_l), float(t2_fs) * FS)


@dataclass(frozen=True)
class Identity:
    """Empty arm, H = 1."""


@dataclass(frozen=True, init=False)
class Lorentzian:
    lines: tuple
    sign: int = 1

    def __init__(self, lines: Sequence[LorentzLine], sign: int = 1):
        lines = tuple(lines)
        if not lines:
            raise InvalidArgument("a Lorentzian medium needs at least one line")
        if sign not in (1, -1):
            raise InvalidArgument("sign convention must be +1 or -1")
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "sign", sign)


@dataclass(frozen=True)
class Tabulated:
    """Transfer function sampled on its own grid; resampled linearly on use."""

    spectrum: ComplexSpectrum


Medium = Union[Identity, Lorentzian, Tabulated]


def _lorentzian_exponent(lines, nu, center_wavelength, sign=1):
    expo = np.zeros(nu.shape, dtype=complex)
    for line in lines:
        omega = nm_to_angular_detuning(line.detuning_nm, center_wavelength, sign)
        gamma = 1.0 / line.t2
        b = line.optical_thickness * gamma / 2.0
        expo += -1j * b / (nu - omega + 1j * gamma)
    return expo


def transfer_function(medium: Medium, grid: SpectralGrid) -> ComplexSpectrum:
    """Evaluate H(omega0 + nu) on the grid.

    Lorentzian media use ``exp[-i sum_k b_k / (nu - Omega_k + i/T2_k)]`` with
    ``b_k = alphaL_k / (2 T2_k)``.
    """
    nu = grid.detunings
    if isinstance(medium, Identity):
        return ComplexSpectrum(grid, np.ones(nu.shape, dtype=complex))
    if isinstance(medium, Lorentzian):
        expo = _lorentzian_exponent(medium.lines, nu, grid.center_wavelength, medium.sign)
        return ComplexSpectrum(grid, np.exp(expo))
    if isinstance(medium, Tabulated):
        src = medium.spectrum
        if src.grid.same_as(grid):
            return ComplexSpectrum(grid, src.values)
        if src.grid.center_wavelength != grid.center_wavelength:
            raise DomainError("tabulated medium refers to a different center wavelength")
        xp = src.grid.detunings
        # tolerate round-off at the end points only
        tol = 1e-12 * (xp[-1] - xp[0])
        if nu[0] < xp[0] - tol or nu[-1] > xp[-1] + tol:
            raise DomainError("tabulated transfer function does not cover the evaluation grid")
        x = np.clip(nu, xp[0], xp[-1])
        values = np.interp(x, xp, src.values.real) + 1j * np.interp(x, xp, src.values.imag)
        return ComplexSpectrum(grid, values)
    raise InvalidArgument(f"unknown medium type {type(medium).__name__}")


def intensity_transmission(medium: Medium, grid: SpectralGrid) -> np.ndarray:
    """|H(omega0 + nu)|**2 on the grid."""
    return transfer_function(medium, grid).intensity


def optical_depth(medium: Medium, grid: SpectralGrid) -> np.ndarray:
    """-ln |H|**2; for Lorentzian media computed from the exponent directly (no underflow)."""
    if isinstance(medium, Lorentzian):
        expo = _lorentzian_exponent(medium.lines, grid.detunings, grid.center_wavelength, medium.sign)
        return -2.0 * expo.real
    return -np.log(intensity_transmission(medium, grid))


def thin_sample_t2_from_fwhm(fwhm: float) -> float:
    """Coherence time 1/(pi * FWHM) of an optically thin line; FWHM in Hz, result in s."""
    if not fwhm > 0:
        raise InvalidArgument("FWHM must be positive")
    return 1.0 / (np.pi * fwhm)


def thin_sample_t2_from_nm(fwhm_nm: float, center_wavelength: float) -> float:
    """As :func:`thin_sample_t2_from_fwhm` for a linewidth quoted in nm."""
    return thin_sample_t2_from_fwhm(float(nm_width_to_hz(fwhm_nm, center_wavelength)))
