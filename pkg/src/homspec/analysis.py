"""Line parameters from transmission spectra, thin-sample T2 and temporal resolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .errors import DomainError, InvalidArgument
from .lm import levenberg_marquardt
from .medium import thin_sample_t2_from_fwhm, thin_sample_t2_from_nm
from .units import angular_detuning_to_nm, nm_to_angular_detuning, nm_width_to_hz

TRANSMISSION_FLOOR = 1e-4
MIN_DEPTH = 0.2


@dataclass(frozen=True, eq=False)
class TransmissionSpectrum:
    wavelengths: np.ndarray = field(repr=False)
    transmission: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.wavelengths, dtype=float)
        t = np.asarray(self.transmission, dtype=float)
        if w.shape != t.shape or w.ndim != 1:
            raise InvalidArgument("wavelengths and transmission must be 1-D arrays of equal length")
        if w.size > 1 and np.any(np.diff(w) <= 0):
            raise InvalidArgument("wavelengths must be strictly increasing")
        object.__setattr__(self, "wavelengths", w)
        object.__setattr__(self, "transmission", t)


@dataclass(frozen=True)
class LineEstimate:
    detuning_nm: float
    alpha_l: float
    fwhm_nm: float
    t2_thin_estimate: float
    converged: bool = True

    def __post_init__(self):
        if self.alpha_l < 0:
            raise InvalidArgument("alpha_l must be non-negative")
        if not self.fwhm_nm > 0:
            raise InvalidArgument("fwhm_nm must be positive")


def normalize_to_filter(raw: TransmissionSpectrum, filter_intensity: TransmissionSpectrum,
                        floor: float = 0.01) -> TransmissionSpectrum:
    """Divide by the filter transmission where it exceeds ``floor`` times its peak.

    The filter curve is linearly interpolated onto the raw wavelengths; raw
    points outside the filter's range or under the floor are dropped.
    """
    fw, ft = filter_intensity.wavelengths, filter_intensity.transmission
    inside = (raw.wavelengths >= fw[0]) & (raw.wavelengths <= fw[-1])
    if not np.any(inside):
        raise DomainError("raw and filter spectra do not overlap")
    w = raw.wavelengths[inside]
    filt = np.interp(w, fw, ft)
    keep = filt > floor * ft.max()
    if not np.any(keep):
        raise DomainError("filter transmission is below the floor over the whole overlap")
    return TransmissionSpectrum(w[keep], raw.transmission[inside][keep] / filt[keep])


def _lorentz_sum(x, params):
    out = np.zeros_like(x)
    for center, depth, gamma in params.reshape(-1, 3):
        out += depth * gamma**2 / ((x - center) ** 2 + gamma**2)
    return out


def optical_depth_profile(lines: List[LineEstimate], wavelengths, center_wavelength: float,
                          sign: int = 1) -> np.ndarray:
    """Sum-of-Lorentzians optical depth described by ``lines`` at ``wavelengths`` (nm)."""
    x = nm_to_angular_detuning(np.asarray(wavelengths) - center_wavelength, center_wavelength, sign)
    params = []
    for line in lines:
        params += [float(nm_to_angular_detuning(line.detuning_nm, center_wavelength, sign)), line.alpha_l,
                   0.5 * abs(float(nm_to_angular_detuning(line.fwhm_nm, center_wavelength)))]
    return _lorentz_sum(x, np.array(params))


def extract_lines(spectrum: TransmissionSpectrum, center_wavelength: float, max_lines: int = 5, *,
                  min_depth: float = MIN_DEPTH, floor: float = TRANSMISSION_FLOOR,
                  sign: int = 1) -> List[LineEstimate]:
    """Fit the optical depth ``-ln T`` as a sum of Lorentzians, one per absorption line.

    Lines are seeded at depth maxima of height and prominence at least
    ``min_depth``; all seeds are fitted jointly and the ``max_lines`` deepest
    are returned. Points where
    ``T <= floor`` carry no shape information and are excluded from the fit.
    Returned lines are sorted by wavelength.
    """
    if max_lines < 1:
        raise InvalidArgument("max_lines must be at least 1")
    lam = spectrum.wavelengths
    t = spectrum.transmission
    depth = -np.log(np.maximum(t, floor))
    x = nm_to_angular_detuning(lam - center_wavelength, center_wavelength, sign)

    peaks, _ = find_peaks(depth, height=min_depth, prominence=min_depth)
    if peaks.size == 0:
        return []
    widths = peak_widths(depth, peaks, rel_height=0.5)[0]
    spacing = np.abs(np.gradient(x))

    x_unit = float(np.median(spacing)) * 10.0
    p0, lower, upper, scales = [], [], [], []
    for p, w in zip(peaks, widths):
        gamma = max(0.5 * w * spacing[p], spacing[p])
        p0 += [x[p], depth[p], gamma]
        lower += [x.min(), 0.0, 0.1 * spacing[p]]
        upper += [x.max(), 100.0, np.ptp(x)]
        scales += [x_unit, 1.0, gamma]
    keep = t > floor
    xk, dk = x[keep], depth[keep]

    result = levenberg_marquardt(lambda q: _lorentz_sum(xk, q) - dk, np.array(p0), np.array(lower),
                                 np.array(upper), np.array(scales), max_iter=500)

    fitted = result.x.reshape(-1, 3)
    # every seeded line is modelled so that none biases the others; report the deepest
    fitted = fitted[np.argsort(fitted[:, 1])[::-1][:max_lines]]
    lines = []
    for center, height, gamma in fitted:
        fwhm_nm = abs(float(angular_detuning_to_nm(2.0 * gamma, center_wavelength)))
        lines.append(LineEstimate(
            detuning_nm=float(angular_detuning_to_nm(center, center_wavelength, sign)),
            alpha_l=float(height),
            fwhm_nm=fwhm_nm,
            t2_thin_estimate=thin_sample_t2_from_nm(fwhm_nm, center_wavelength),
            converged=result.converged,
        ))
    return sorted(lines, key=lambda line: line.detuning_nm)


def transmission_dip_fwhm(spectrum: TransmissionSpectrum) -> float:
    """Full width (nm) of the deepest transmission dip at half its depth below unity.

    This is the width a spectrometer reading reports; for optically thick lines
    it exceeds the Lorentzian width of the optical depth.
    """
    lam, t = spectrum.wavelengths, spectrum.transmission
    i = int(np.argmin(t))
    level = 0.5 * (1.0 + t[i])
    left = i
    while left > 0 and t[left] < level:
        left -= 1
    right = i
    while right < t.size - 1 and t[right] < level:
        right += 1
    if t[left] < level or t[right] < level:
        raise DomainError("dip does not recover to half depth inside the spectrum")
    lo = np.interp(level, [t[left + 1], t[left]], [lam[left + 1], lam[left]])
    hi = np.interp(level, [t[right - 1], t[right]], [lam[right - 1], lam[right]])
    return float(hi - lo)


def resolution_estimate(spectrum_fwhm: float, center_wavelength: float) -> float:
    """Temporal resolution ``1/(pi * dnu)`` (s) of a biphoton spectrum ``spectrum_fwhm`` nm wide."""
    if not spectrum_fwhm > 0 or not center_wavelength > 0:
        raise InvalidArgument("spectral width and center wavelength must be positive")
    return thin_sample_t2_from_fwhm(float(nm_width_to_hz(spectrum_fwhm, center_wavelength)))


def spectrum_fwhm(spectrum: TransmissionSpectrum) -> float:
    """FWHM (nm) of a single-peaked emission spectrum such as a measured SPDC spectrum."""
    lam, y = spectrum.wavelengths, spectrum.transmission
    half = 0.5 * y.max()
    above = np.flatnonzero(y >= half)
    i, j = above[0], above[-1]
    if i == 0 or j == y.size - 1:
        raise DomainError("spectrum does not fall to half maximum on both sides")
    lo = np.interp(half, [y[i - 1], y[i]], [lam[i - 1], lam[i]])
    hi = np.interp(half, [y[j + 1], y[j]], [lam[j + 1], lam[j]])
    return float(hi - lo)
