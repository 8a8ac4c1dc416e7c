"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""

import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homspec.analysis import TransmissionSpectrum, extract_lines, resolution_estimate, transmission_dip_fwhm
from homspec.engine import EngineConfig, coincidence_rates, simulate_dip, synthesize_counts
from homspec.fitting import fit_dip
from homspec.fixtures import fixture_config
from homspec.lm import levenberg_marquardt
from homspec.medium import (Identity, LorentzLine, Lorentzian, Tabulated, intensity_transmission, optical_depth,
                            thin_sample_t2_from_nm, transfer_function)
from homspec.pipeline import build_field, build_fit_model, fit, roundtrip_study, simulate
from homspec.spectral import (ComplexSpectrum, FilterSpec, PhaseMatchSpec, SpectralGrid, biphoton_amplitude,
                              build_grid, default_grid)
from homspec.units import FS, nm_to_angular_detuning

from oracles import gaussian_dip

N_SEEDS = 100


def skewness(x, profile):
    """Third standardized moment of a dip profile; negative ripple lobes are clipped so weights stay valid."""
    w = np.clip(profile, 0.0, None)
    w = w / np.trapezoid(w, x)
    m = np.trapezoid(w * x, x)
    var = np.trapezoid(w * (x - m) ** 2, x)
    return np.trapezoid(w * (x - m) ** 3, x) / var**1.5


def extrema_outside_dip(trace):
    """Local extrema of the rate lying beyond the half-depth crossings of the main dip."""
    r = trace.rates
    i = int(np.argmin(r))
    level = 1.0 - 0.5 * (1.0 - r[i])
    left, right = i, i
    while left > 0 and r[left] < level:
        left -= 1
    while right < r.size - 1 and r[right] < level:
        right += 1
    s = np.sign(np.diff(r))
    ext = np.flatnonzero(s[1:] * s[:-1] < 0) + 1
    return ext[(ext < left) | (ext > right)]


def wavelength_spectrum(medium, lam, lam0=815.0):
    grid = SpectralGrid(lam0, nm_to_angular_detuning(lam - lam0, lam0))
    return TransmissionSpectrum(lam, intensity_transmission(medium, grid))


def test_criterion_1_gaussian_closed_form(acceptance_report):
    sigma = 5e13
    grid = build_grid(815.0, 12 * sigma, 4096)
    f2 = np.exp(-grid.detunings**2 / sigma**2)
    F = ComplexSpectrum(grid, np.sqrt(f2 / np.trapezoid(f2, grid.detunings)))
    tau = np.linspace(-3 / sigma, 3 / sigma, 301)
    start = time.perf_counter()
    trace = simulate_dip(F, Identity(), tau, EngineConfig(visibility=0.8))
    elapsed = time.perf_counter() - start
    err = np.max(np.abs(trace.rates - gaussian_dip(tau, 0.8, sigma)) / gaussian_dip(tau, 0.8, sigma))
    passed = err <= 1e-6 and elapsed < 1.0
    acceptance_report(1, passed, f"max rel err {err:.2e}, runtime {elapsed:.3f} s")
    assert passed


def test_criterion_2_empty_interferometer(acceptance_report):
    cfg = fixture_config("empty")
    F = build_field(cfg)
    # the delay grid must be symmetric about zero for the mirror comparison
    cfg.engine.tau_min_fs, cfg.engine.tau_max_fs, cfg.engine.tau_step_fs = -400.0, 400.0, 2.0
    trace = simulate(cfg, F)
    asym = np.max(np.abs(trace.rates - trace.rates[::-1]))
    depth = 1.0 - trace.rates.min()
    cfg.fit.init = {"visibility": 0.8, "tau_offset_fs": 10.0}
    result = fit(cfg, trace, F)
    v = result.value("visibility")
    passed = (asym < 1e-6 and abs(depth - 0.92) <= 1e-6 and abs(v - 0.92) <= 1e-3 * 0.92
              and result.r_squared >= 1 - 1e-9)
    acceptance_report(2, passed, f"asymmetry {asym:.1e}, depth {depth:.8f}, refit V {v:.6f}, "
                                 f"R2 1-{1 - result.r_squared:.1e}")
    assert passed


def test_criterion_3_nd_yag_shape(acceptance_report):
    # moments are taken over a delay window symmetric about zero so the empty trace has zero skewness
    window = {"tau_min_fs": -2400.0, "tau_max_fs": 2400.0, "tau_step_fs": 2.0}
    cfg, empty = fixture_config("nd_yag"), fixture_config("empty")
    for c in (cfg, empty):
        for key, value in window.items():
            setattr(c.engine, key, value)
    start = time.perf_counter()
    trace = simulate(cfg)
    elapsed = time.perf_counter() - start
    reference = simulate(empty)
    skew = skewness(trace.delays, 1.0 - trace.rates)
    skew_ref = skewness(reference.delays, 1.0 - reference.rates)
    n_ext = extrema_outside_dip(trace).size
    passed = abs(skew) > 1e-5 and n_ext >= 2 and elapsed < 10.0
    acceptance_report(3, passed, f"skewness {skew:.3f} (empty {skew_ref:.1e}), {n_ext} extrema outside dip, "
                                 f"runtime {elapsed:.2f} s")
    assert passed


@pytest.mark.slow
def test_criterion_4_nd_yag_round_trip(acceptance_report):
    cfg = fixture_config("nd_yag")
    bands = [(620, 50), (660, 50), (415, 30), (710, 60), (215, 20)]
    rows = roundtrip_study(cfg, range(N_SEEDS))
    t2 = np.array([r["t2_fs"] for r in rows])
    hits = [int(np.sum(np.abs(t2[:, k] - c) <= w)) for k, (c, w) in enumerate(bands)]
    mean_r2 = float(np.mean([r["r_squared"] for r in rows]))
    passed = min(hits) >= 90 and mean_r2 >= 0.93
    acceptance_report(4, passed, f"in-band counts {hits}/{N_SEEDS}, mean R2 {mean_r2:.4f}, "
                                 f"mean T2 {np.round(t2.mean(axis=0), 1).tolist()} fs")
    assert passed


@pytest.mark.slow
def test_criterion_5_nanodisc_round_trip(acceptance_report):
    cfg = fixture_config("nanodisc")
    F = build_field(cfg)
    rows = roundtrip_study(cfg, range(N_SEEDS), F)
    t2 = np.array([r["t2_fs"][0] for r in rows])
    hits = int(np.sum(np.abs(t2 - 130.0) <= 15.0))
    noisy_r2 = float(np.mean([r["r_squared"] for r in rows]))
    cfg.fit.init = {"t2_fs": 100.0, "tau_offset_fs": 20.0}
    clean = fit(cfg, simulate(cfg, F), F)
    passed = hits >= 90 and clean.r_squared >= 0.97
    acceptance_report(5, passed, f"{hits}/{N_SEEDS} within 130+-15 fs, noiseless R2 {clean.r_squared:.10f}, "
                                 f"noisy mean R2 {noisy_r2:.4f}")
    assert passed


def test_criterion_6_thick_versus_thin(acceptance_report):
    lam = np.linspace(780.0, 860.0, 80001)
    spec = wavelength_spectrum(fixture_config("nanodisc").medium_object(), lam)
    fwhm = transmission_dip_fwhm(spec)
    t2_thin = thin_sample_t2_from_nm(fwhm, 815.0) / FS
    ratio = 130.0 / t2_thin
    passed = ratio >= 1.7
    acceptance_report(6, passed, f"dip FWHM {fwhm:.2f} nm, thin estimate {t2_thin:.1f} fs, ratio {ratio:.2f}")
    assert passed


def test_criterion_7_thin_sample(acceptance_report):
    lam = np.linspace(795.0, 835.0, 8001)
    spec = wavelength_spectrum(Lorentzian([LorentzLine.from_fs(-7.0, 0.1, 700.0)]), lam)
    (line,) = extract_lines(spec, 815.0, min_depth=0.02)
    t2 = line.t2_thin_estimate / FS
    res = resolution_estimate(1.0, 808.0) / FS
    passed = abs(t2 - 700.0) <= 0.02 * 700.0 and abs(res - 700.0) <= 0.05 * 700.0
    acceptance_report(7, passed, f"extracted T2 {t2:.2f} fs (true 700), 1 nm at 808 nm gives {res:.1f} fs, "
                                 f"line FWHM {line.fwhm_nm:.3f} nm")
    assert passed


def test_criterion_8_resolution(acceptance_report):
    res = resolution_estimate(21.0, 815.0) / FS
    passed = 33.0 <= res <= 37.0
    acceptance_report(8, passed, f"resolution {res:.2f} fs")
    assert passed


# --- criterion 9: compact property suite ---------------------------------------

LINES = st.lists(st.builds(LorentzLine.from_fs, st.floats(-12, 12), st.floats(0, 8), st.floats(30, 1500)),
                 min_size=1, max_size=4)
FAST = settings(max_examples=15, deadline=None)


def _small_field():
    return biphoton_amplitude(PhaseMatchSpec(22.0), FilterSpec(), build_grid(815.0, 2.5e14, 1024))


@FAST
@given(LINES, st.floats(-300, 300), st.floats(0, 1))
def _mirror_symmetry(lines, tau0_fs, v):
    F = _small_field()
    med = Lorentzian(lines)
    H = transfer_function(med, F.grid)
    Hm = transfer_function(Tabulated(H.mirrored()), F.grid)
    delta = np.linspace(-500, 500, 41) * FS
    tau0 = tau0_fs * FS
    fwd = coincidence_rates(F, H, tau0 + delta, v, tau0)
    rev = coincidence_rates(F, Hm, tau0 - delta, v, tau0)
    assert np.max(np.abs(fwd - rev)) < 1e-9


@FAST
@given(LINES, st.floats(0, 2 * np.pi))
def _global_phase(lines, theta):
    F = _small_field()
    H = transfer_function(Lorentzian(lines), F.grid)
    Hp = ComplexSpectrum(F.grid, np.exp(1j * theta) * H.values)
    tau = np.linspace(-500, 1500, 41) * FS
    assert np.max(np.abs(coincidence_rates(F, H, tau, 0.9) - coincidence_rates(F, Hp, tau, 0.9))) < 1e-12


@FAST
@given(LINES, LINES)
def _depth_additivity(a, b):
    grid = build_grid(815.0, 2.5e14, 1024)
    joint = optical_depth(Lorentzian(a + b), grid)
    parts = optical_depth(Lorentzian(a), grid) + optical_depth(Lorentzian(b), grid)
    assert np.allclose(joint, parts, rtol=1e-10, atol=1e-12)


def _quadrature_convergence():
    filt, pm = FilterSpec(), PhaseMatchSpec(22.0)
    tau = np.linspace(-2000, 2000, 201) * FS
    coarse = default_grid(filt)
    fine = build_grid(815.0, coarse.half_span, 2 * coarse.n_points)
    worst = 0.0
    for name in ("empty", "nd_yag", "nanodisc"):
        med = fixture_config(name).medium_object()
        p1 = simulate_dip(biphoton_amplitude(pm, filt, coarse), med, tau, EngineConfig(0.92)).rates
        p2 = simulate_dip(biphoton_amplitude(pm, filt, fine), med, tau, EngineConfig(0.92)).rates
        worst = max(worst, float(np.max(np.abs(p1 - p2) / np.abs(p2))))
    assert worst < 1e-6
    return worst


@FAST
@given(st.floats(0.2, 5), st.floats(0.3, 8), st.floats(-1, 1), st.integers(0, 1000))
def _monotone_cost(a, tau, c, seed):
    t = np.linspace(0, 10, 40)
    model = lambda p: p[0] * np.exp(-t / p[1]) + p[2]
    y = model([a, tau, c]) + np.random.default_rng(seed).normal(0, 0.1, t.size)
    res = levenberg_marquardt(lambda p: model(p) - y, np.array([1.0, 1.0, 0.0]), [0, 0.1, -5], [10, 10, 5])
    assert np.all(np.diff(res.cost_history) <= 0)


def _determinism():
    cfg = fixture_config("nanodisc")
    F = build_field(cfg)
    trace = simulate(cfg, F)
    a = synthesize_counts(trace, 6000.0, 0.0, 0.8, 9)
    b = synthesize_counts(trace, 6000.0, 0.0, 0.8, 9)
    assert np.array_equal(a.counts, b.counts)
    model = build_fit_model(cfg, F, a)
    ra, rb = fit_dip(model, a), fit_dip(model, b)
    assert np.array_equal(ra.estimates, rb.estimates) and ra.cost_history == rb.cost_history


def test_criterion_9_property_suites(acceptance_report):
    checks = {"mirror": _mirror_symmetry, "global phase": _global_phase, "additivity": _depth_additivity,
              "quadrature": _quadrature_convergence, "monotone cost": _monotone_cost,
              "determinism": _determinism}
    failed = []
    for name, check in checks.items():
        try:
            check()
        except AssertionError:
            failed.append(name)
    acceptance_report(9, not failed, f"{len(checks) - len(failed)}/{len(checks)} properties hold"
                                     + (f", failing: {failed}" if failed else ""))
    assert not failed
