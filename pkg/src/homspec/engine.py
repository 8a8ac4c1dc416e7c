"""Hong-Ou-Mandel coincidence rate for a cw-pumped biphoton through a resonant arm.

    P_c(tau) = 1/4 int dnu |F(nu)|^2 (|H(w0-nu)|^2 + |H(w0+nu)|^2)
               - 1/2 V Re int dnu |F(nu)|^2 H*(w0-nu) H(w0+nu) exp(-2i nu (tau - tau0))

Integrals are composite trapezoid sums on the shared uniform detuning grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidArgument
from .medium import Medium, transfer_function
from .spectral import DEFAULT_N_POINTS, ComplexSpectrum

NORMALIZATIONS = ("raw", "baseline-one")

# delays x support points evaluated per block when no kernel is cached
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class EngineConfig:
    visibility: float = 1.0
    tau_offset: float = 0.0
    n_points: int = DEFAULT_N_POINTS
    normalization: str = "baseline-one"

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise InvalidArgument(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidArgument(f"normalization must be one of {NORMALIZATIONS}")
        if self.n_points < 2:
            raise InvalidArgument("n_points must be at least 2")


@dataclass(frozen=True, eq=False)
class DipTrace:
    """Model coincidence rate versus delay (delays in s)."""

    delays: np.ndarray = field(repr=False)
    rates: np.ndarray = field(repr=False)
    normalization: str = "baseline-one"

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if d.shape != r.shape or d.ndim != 1:
            raise InvalidArgument("delays and rates must be 1-D arrays of equal length")
        if d.size > 1 and np.any(np.diff(d) <= 0):
            raise InvalidArgument("delays must be strictly increasing")
        if np.any(r < -1e-12):
            raise InvalidArgument("rates must be non-negative")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidArgument(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "rates", np.clip(r, 0.0, None))


@dataclass(frozen=True, eq=False)
class CountTrace:
    """Measured coincidence counts versus delay."""

    delays: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    acquisition_time_per_point: Union[float, np.ndarray] = 1.0

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        c = np.asarray(self.counts)
        if d.shape != c.shape or d.ndim != 1:
            raise InvalidArgument("delays and counts must be 1-D arrays of equal length")
        if np.any(c < 0):
            raise InvalidArgument("counts must be non-negative")
        if np.any(c != np.round(c)):
            raise InvalidArgument("counts must be integers")
        acq = np.broadcast_to(np.asarray(self.acquisition_time_per_point, dtype=float), d.shape)
        if np.any(acq <= 0):
            raise InvalidArgument("acquisition time must be positive")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "counts", c.astype(np.int64))
        object.__setattr__(self, "acquisition_time_per_point", np.array(acq))


def _check_pair(F: ComplexSpectrum, H: ComplexSpectrum):
    if not F.grid.same_as(H.grid):
        raise InvalidArgument("F and H must be sampled on the same grid")
    if not F.grid.is_symmetric():
        raise InvalidArgument("the detuning grid must be symmetric about zero")


def trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    w = np.full(n, spacing)
    w[0] = w[-1] = 0.5 * spacing
    return w


def rate_components(F: ComplexSpectrum, H: ComplexSpectrum):
    """Baseline (tau -> infinity) rate and the quadrature-weighted cross-term integrand.

    Returns ``(baseline, weights)`` where ``cross(tau) = sum(weights * exp(-2i nu tau))``.
    """
    _check_pair(F, H)
    grid = F.grid
    q = trapezoid_weights(grid.n_points, grid.spacing)
    f2 = F.intensity
    h_plus = H.values
    h_minus = h_plus[::-1]
    baseline = 0.25 * float(np.sum(q * f2 * (np.abs(h_minus) ** 2 + np.abs(h_plus) ** 2)))
    weights = q * f2 * np.conj(h_minus) * h_plus
    return baseline, weights


def _cross_sum(nu, weights, shifted_delays):
    out = np.empty(shifted_delays.size, dtype=complex)
    block = max(1, _BLOCK_ELEMENTS // max(nu.size, 1))
    for start in range(0, shifted_delays.size, block):
        t = shifted_delays[start:start + block]
        out[start:start + block] = np.exp(-2j * np.outer(t, nu)) @ weights
    return out


def support_mask(F: ComplexSpectrum, support_rtol: float) -> np.ndarray:
    """Grid points whose |F|^2 exceeds ``support_rtol`` times the peak."""
    f2 = F.intensity
    if support_rtol <= 0:
        return np.ones(f2.shape, dtype=bool)
    return f2 > support_rtol * f2.max()


def coincidence_rates(F: ComplexSpectrum, H: ComplexSpectrum, delays, visibility: float = 1.0,
                      tau_offset: float = 0.0, support_rtol: float = 0.0) -> np.ndarray:
    """Unnormalized P_c at each delay (s).

    ``support_rtol > 0`` drops grid points where |F|^2 is below that fraction of
    its peak; the default keeps every point.
    """
    if not 0.0 <= visibility <= 1.0:
        raise InvalidArgument(f"visibility must lie in [0, 1], got {visibility}")
    baseline, weights = rate_components(F, H)
    keep = support_mask(F, support_rtol)
    tau = np.atleast_1d(np.asarray(delays, dtype=float)) - tau_offset
    cross = _cross_sum(F.grid.detunings[keep], weights[keep], tau)
    return baseline - 0.5 * visibility * cross.real


def coincidence_rate(F: ComplexSpectrum, H: ComplexSpectrum, tau: float, visibility: float = 1.0,
                     tau_offset: float = 0.0) -> float:
    """P_c at a single delay ``tau`` (s)."""
    return float(coincidence_rates(F, H, [tau], visibility, tau_offset)[0])


def simulate_dip(F: ComplexSpectrum, medium: Medium, delays, config: EngineConfig = EngineConfig(),
                 support_rtol: float = 0.0) -> DipTrace:
    """Scan the delay and return the coincidence trace for ``medium`` in one arm."""
    delays = np.asarray(delays, dtype=float)
    if delays.size > 1 and np.any(np.diff(delays) <= 0):
        raise InvalidArgument("delays must be sorted and distinct")
    H = transfer_function(medium, F.grid)
    rates = coincidence_rates(F, H, delays, config.visibility, config.tau_offset, support_rtol)
    if config.normalization == "baseline-one":
        baseline, _ = rate_components(F, H)
        rates = rates / baseline
    return DipTrace(delays, rates, config.normalization)


class DipKernel:
    """Cached phase matrix for repeated evaluation on fixed delays.

    ``exp(-2i nu (tau - tau0))`` factors into a cached ``exp(-2i nu tau)`` matrix
    times ``exp(2i nu tau0)`` folded into the weights, so a changing ``tau0``
    costs one vector product.
    """

    def __init__(self, F: ComplexSpectrum, delays, support_rtol: float = 0.0):
        self.F = F
        self.delays = np.asarray(delays, dtype=float)
        self.keep = support_mask(F, support_rtol)
        self.nu = F.grid.detunings[self.keep]
        self._phase = np.exp(-2j * np.outer(self.delays, self.nu))

    def rates(self, H: ComplexSpectrum, visibility: float, tau_offset: float,
              normalization: str = "baseline-one") -> np.ndarray:
        baseline, weights = rate_components(self.F, H)
        w = weights[self.keep] * np.exp(2j * self.nu * tau_offset)
        out = baseline - 0.5 * visibility * (self._phase @ w).real
        if normalization == "baseline-one":
            out = out / baseline
        return out


def synthesize_counts(trace: DipTrace, peak_rate: float, dark_coincidence_rate: float,
                      acquisition, seed: int) -> CountTrace:
    """Poisson counts with mean ``(peak_rate * rate + dark_rate) * acquisition`` per delay."""
    rates = np.asarray(trace.rates, dtype=float)
    if not np.all(np.isfinite(rates)):
        raise InvalidArgument("trace rates must be finite")
    if np.any(rates < 0) or peak_rate < 0 or dark_coincidence_rate < 0:
        raise InvalidArgument("rates must be non-negative")
    acq = np.broadcast_to(np.asarray(acquisition, dtype=float), rates.shape)
    if np.any(acq <= 0):
        raise InvalidArgument("acquisition time must be positive")
    mean = (peak_rate * rates + dark_coincidence_rate) * acq
    rng = np.random.default_rng(seed)
    return CountTrace(trace.delays, rng.poisson(mean), np.array(acq))
