"""Biphoton spectral amplitude: phase-matching envelope times bandpass filter.

All detunings are angular frequencies (rad/s) measured from the biphoton
center frequency; wavelengths are in nm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import CalibrationError, InvalidArgument
from .units import nm_to_angular_detuning

DEFAULT_N_POINTS = 16384
DEFAULT_MAGNITUDE_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform, symmetric grid of angular detunings about ``center_wavelength``."""

    center_wavelength: float
    detunings: np.ndarray = field(repr=False)

    def __post_init__(self):
        nu = np.asarray(self.detunings, dtype=float)
        if nu.ndim != 1 or nu.size < 2:
            raise InvalidArgument("a grid needs at least two points")
        if np.any(np.diff(nu) <= 0):
            raise InvalidArgument("grid detunings must be strictly increasing")
        span = nu[-1] - nu[0]
        ideal = nu[0] + span * np.arange(nu.size) / (nu.size - 1)
        if np.max(np.abs(nu - ideal)) > 1e-12 * span:
            raise InvalidArgument("grid detunings must be uniformly spaced")
        nu.setflags(write=False)
        object.__setattr__(self, "detunings", nu)

    @property
    def n_points(self) -> int:
        return self.detunings.size

    @property
    def spacing(self) -> float:
        return (self.detunings[-1] - self.detunings[0]) / (self.n_points - 1)

    @property
    def half_span(self) -> float:
        return 0.5 * (self.detunings[-1] - self.detunings[0])

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        return bool(np.allclose(self.detunings, -self.detunings[::-1], rtol=0, atol=rtol * self.half_span))

    def same_as(self, other: "SpectralGrid") -> bool:
        return (
            self is other
            or (
                self.n_points == other.n_points
                and self.center_wavelength == other.center_wavelength
                and np.array_equal(self.detunings, other.detunings)
            )
        )


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    """Complex samples of a spectral function on a :class:`SpectralGrid`."""

    grid: SpectralGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise InvalidArgument(f"values length {v.shape} does not match grid ({self.grid.n_points})")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("spectrum values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def mirrored(self) -> "ComplexSpectrum":
        """Values at ``-nu`` (requires a symmetric grid)."""
        if not self.grid.is_symmetric():
            raise InvalidArgument("mirroring needs a grid symmetric about zero")
        return ComplexSpectrum(self.grid, self.values[::-1])


@dataclass(frozen=True)
class FilterSpec:
    """Trapezoidal bandpass filter, all widths in nm."""

    center_wavelength: float = 815.0
    top_width: float = 15.5
    slope_width: float = 3.3
    magnitude_floor: float = DEFAULT_MAGNITUDE_FLOOR

    def __post_init__(self):
        if self.center_wavelength <= 0:
            raise InvalidArgument("filter center wavelength must be positive")
        if self.top_width <= 0 or self.slope_width <= 0:
            raise InvalidArgument("filter top and slope widths must be positive")
        if not 0 < self.magnitude_floor < 1:
            raise InvalidArgument("magnitude floor must lie in (0, 1)")


@dataclass(frozen=True)
class PhaseMatchSpec:
    """Phase-matching envelope ``sinc(nu**2 * s)``.

    Give either ``intensity_fwhm`` (nm, calibrates ``s``) or ``argument_scale``
    (``s`` in s**2, the combination D''L_c/2) but not both.
    """

    intensity_fwhm: Optional[float] = None
    argument_scale: Optional[float] = None

    def __post_init__(self):
        given = [v for v in (self.intensity_fwhm, self.argument_scale) if v is not None]
        if len(given) != 1:
            raise InvalidArgument("set exactly one of intensity_fwhm or argument_scale")
        if given[0] <= 0:
            raise InvalidArgument("phase-matching parameter must be positive")


def build_grid(center_wavelength: float, half_span: float, n_points: int) -> SpectralGrid:
    """Uniform grid on ``[-half_span, half_span]`` rad/s with ``n_points`` samples."""
    if not half_span > 0:
        raise InvalidArgument(f"half_span must be positive, got {half_span}")
    if n_points < 2 or n_points % 2:
        raise InvalidArgument(f"n_points must be even and >= 2, got {n_points}")
    if center_wavelength <= 0:
        raise InvalidArgument("center wavelength must be positive")
    return SpectralGrid(center_wavelength, np.linspace(-half_span, half_span, n_points))


def filter_half_bandwidth(filt: FilterSpec, center_wavelength: float) -> float:
    """Half of the filter's full base width plus its offset from the grid center, in rad/s."""
    offset = abs(filt.center_wavelength - center_wavelength)
    return float(nm_to_angular_detuning(offset + 0.5 * filt.top_width + filt.slope_width, center_wavelength))


def default_grid(filt: FilterSpec, center_wavelength: Optional[float] = None,
                 n_points: int = DEFAULT_N_POINTS) -> SpectralGrid:
    """Grid spanning four filter half-bandwidths with 16384 points by default."""
    lam0 = filt.center_wavelength if center_wavelength is None else center_wavelength
    return build_grid(lam0, 4.0 * filter_half_bandwidth(filt, lam0), n_points)


def trapezoid_intensity(filt: FilterSpec, grid: SpectralGrid) -> np.ndarray:
    """Filter intensity transmission |Phi(nu)|**2 on the grid.

    Unity across the flat top, linear ramps across each slope, and clamped from
    below at ``magnitude_floor**2`` so that the amplitude never drops under
    ``magnitude_floor``.
    """
    lam0 = grid.center_wavelength
    center = nm_to_angular_detuning(filt.center_wavelength - lam0, lam0)
    half_top = nm_to_angular_detuning(0.5 * filt.top_width, lam0)
    slope = nm_to_angular_detuning(filt.slope_width, lam0)
    dist = np.abs(grid.detunings - center)
    ramp = 1.0 - (dist - half_top) / slope
    return np.clip(ramp, filt.magnitude_floor**2, 1.0)


def _hilbert_fft(x: np.ndarray, pad_factor: int = 4) -> np.ndarray:
    """Discrete Hilbert transform (cos -> sin convention) with zero padding."""
    n = x.size
    n_fft = 1 << int(np.ceil(np.log2(max(pad_factor, 1) * n)))
    spec = np.fft.fft(x, n_fft)
    k = np.fft.fftfreq(n_fft)
    spec *= -1j * np.sign(k)
    return np.fft.ifft(spec)[:n].real


def minimum_phase(magnitude, grid: SpectralGrid, pad_factor: int = 4) -> ComplexSpectrum:
    """Attach the minimum phase ``-Hilbert[ln M]`` to a magnitude profile.

    The log-magnitude is referenced to its edge level before zero padding so
    that padding does not introduce a step; the Hilbert transform of a
    constant vanishes, so this leaves the phase unchanged.
    """
    mag = np.asarray(magnitude, dtype=float)
    if mag.shape != (grid.n_points,):
        raise InvalidArgument("magnitude length does not match grid")
    if pad_factor < 4:
        raise InvalidArgument("pad_factor must be at least 4")
    if np.any(~np.isfinite(mag)) or np.any(mag <= 0):
        raise InvalidArgument("magnitude must be strictly positive (apply a floor first)")
    log_mag = np.log(mag)
    log_mag = log_mag - 0.5 * (log_mag[0] + log_mag[-1])
    phase = -_hilbert_fft(log_mag, pad_factor)
    return ComplexSpectrum(grid, mag * np.exp(1j * phase))


_SINC2_HALF = brentq(lambda x: (np.sin(x) / x) ** 2 - 0.5, 0.5, 2.0, xtol=1e-15)


def calibrate_argument_scale(intensity_fwhm: float, center_wavelength: float) -> float:
    """Scale ``s`` such that ``sinc(nu**2 s)**2`` has the given FWHM (nm)."""
    if not intensity_fwhm > 0:
        raise CalibrationError(f"cannot calibrate to FWHM {intensity_fwhm}")
    nu_half = float(nm_to_angular_detuning(0.5 * intensity_fwhm, center_wavelength))

    def excess(log_s):
        x = nu_half**2 * np.exp(log_s)
        return (np.sin(x) / x) ** 2 - 0.5

    # sinc^2 is monotone on (0, pi); bracket x in (1e-3, 3)
    lo, hi = np.log(1e-3 / nu_half**2), np.log(3.0 / nu_half**2)
    if not excess(lo) > 0 > excess(hi):
        raise CalibrationError("phase-matching calibration failed to bracket a root")
    return float(np.exp(brentq(excess, lo, hi, xtol=1e-14, rtol=1e-15)))


def phase_matching_amplitude(pm: PhaseMatchSpec, grid: SpectralGrid) -> np.ndarray:
    """Real envelope ``sinc(nu**2 s)`` with ``sinc(x) = sin(x)/x``; side lobes keep their sign."""
    if pm.argument_scale is not None:
        s = pm.argument_scale
    else:
        s = calibrate_argument_scale(pm.intensity_fwhm, grid.center_wavelength)
    x = grid.detunings**2 * s
    return np.sinc(x / np.pi)


def spectral_norm(values, grid: SpectralGrid) -> float:
    """Trapezoid-rule integral of ``|values|**2`` over the grid."""
    return float(np.trapezoid(np.abs(values) ** 2, grid.detunings))


def biphoton_amplitude(pm: PhaseMatchSpec, filt: FilterSpec, grid: SpectralGrid) -> ComplexSpectrum:
    """F(nu) = F_bp(nu) * Phi(nu), normalized to unit integrated intensity."""
    envelope = phase_matching_amplitude(pm, grid)
    phi = minimum_phase(np.sqrt(trapezoid_intensity(filt, grid)), grid)
    values = envelope * phi.values
    norm = spectral_norm(values, grid)
    if not norm > 0:
        raise InvalidArgument("biphoton amplitude vanishes on the grid")
    return ComplexSpectrum(grid, values / np.sqrt(norm))


def intensity_fwhm(spectrum: ComplexSpectrum) -> float:
    """Full width at half maximum of ``|values|**2`` in rad/s (linear interpolation at crossings)."""
    nu = spectrum.grid.detunings
    inten = spectrum.intensity
    half = 0.5 * inten.max()
    above = np.flatnonzero(inten >= half)
    i, j = above[0], above[-1]
    if i == 0 or j == nu.size - 1:
        raise InvalidArgument("intensity does not fall below half maximum within the grid")
    left = np.interp(half, [inten[i - 1], inten[i]], [nu[i - 1], nu[i]])
    right = np.interp(half, [inten[j + 1], inten[j]], [nu[j + 1], nu[j]])
    return float(right - left)
