"""Config-driven runs shared by the command line and the experiment scripts."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Dict, List, Tuple, Union

import numpy as np

from .analysis import extract_lines, normalize_to_filter, spectrum_fwhm
from .config import ConfigError, RunConfig
from .engine import CountTrace, DipTrace, simulate_dip, synthesize_counts
from .fitting import GLOBAL_PARAMETERS, FitModel, FitResult, fit_dip, observed
from .io import read_spectrum
from .medium import LorentzLine
from .spectral import ComplexSpectrum, PhaseMatchSpec, biphoton_amplitude, build_grid, default_grid
from .units import FS

DEFAULT_T2_INIT_FS = 300.0


def build_field(cfg: RunConfig) -> ComplexSpectrum:
    """Normalized biphoton amplitude on the configured grid."""
    src = cfg.source
    filt = src.filter_spec()
    pm = src.phase_match_spec()
    if src.spectrum_file is not None:
        measured = spectrum_fwhm(read_spectrum(cfg.resolve(src.spectrum_file)))
        pm = PhaseMatchSpec(intensity_fwhm=measured)
    if cfg.engine.half_span_rad_s is None:
        grid = default_grid(filt, src.center_wavelength_nm, cfg.engine.n_points)
    else:
        grid = build_grid(src.center_wavelength_nm, cfg.engine.half_span_rad_s, cfg.engine.n_points)
    return biphoton_amplitude(pm, filt, grid)


def simulate(cfg: RunConfig, F: ComplexSpectrum = None) -> DipTrace:
    F = build_field(cfg) if F is None else F
    return simulate_dip(F, cfg.medium_object(), cfg.engine.delays(), cfg.engine.engine_config())


def synthesize(cfg: RunConfig, seed: int = None, F: ComplexSpectrum = None) -> Tuple[CountTrace, Dict]:
    """Poisson count trace for the configured medium plus header metadata."""
    s = cfg.synth
    seed = s.seed if seed is None else seed
    trace = simulate(cfg, F)
    counts = synthesize_counts(trace, s.peak_rate, s.dark_coincidence_rate, s.acquisition_s, seed)
    mean = (s.peak_rate * trace.rates + s.dark_coincidence_rate) * s.acquisition_s
    meta = {
        "seed": seed,
        "peak_rate_per_s": s.peak_rate,
        "dark_coincidence_rate_per_s": s.dark_coincidence_rate,
        "acquisition_s_per_point": s.acquisition_s,
        "total_acquisition_min": round(s.acquisition_s * trace.delays.size / 60.0, 3),
        "expected_counts_range": f"{mean.min():.1f}..{mean.max():.1f}",
        "observed_counts_range": f"{counts.counts.min()}..{counts.counts.max()}",
    }
    return counts, meta


def _expand_free(names: List[str], n_lines: int) -> set:
    out = set()
    for name in names:
        if name in ("t2", "detuning_nm", "alpha_l"):
            out.update(f"{name}_{k}" for k in range(n_lines))
        else:
            out.add(name)
    return out


def _per_line(value, n_lines, default):
    if value is None:
        return [default] * n_lines
    if np.ndim(value) == 0:
        return [float(value)] * n_lines
    if len(value) != n_lines:
        raise ConfigError(f"expected {n_lines} per-line values, got {len(value)}")
    return [float(v) for v in value]


def build_fit_model(cfg: RunConfig, F: ComplexSpectrum, data: Union[CountTrace, DipTrace]) -> FitModel:
    """Fit model from the ``fit`` block, with data-driven defaults for amplitude and baseline."""
    fc = cfg.fit
    init = dict(fc.init or {})
    if cfg.medium.kind == "tabulated":
        raise ConfigError("fitting needs an identity or lorentzian medium")
    lines_cfg = cfg.medium.lines if cfg.medium.kind == "lorentzian" else []
    n = len(lines_cfg)
    t2_init = _per_line(init.pop("t2_fs", None), n, DEFAULT_T2_INIT_FS)
    lines = [LorentzLine.from_fs(lc.detuning_nm, lc.alpha_l, t) for lc, t in zip(lines_cfg, t2_init)]

    baseline = init.pop("baseline", None)
    if baseline is None:
        # counts carry the dark rate; a model trace has none
        baseline = 0.0
        if isinstance(data, CountTrace):
            baseline = cfg.synth.dark_coincidence_rate * float(np.mean(data.acquisition_time_per_point))
    baseline = float(baseline)
    amplitude = init.pop("amplitude", None)
    if amplitude is None:
        amplitude = max(float(np.median(observed(data))) - baseline, 1e-12)
    visibility = init.pop("visibility", None)
    visibility = cfg.engine.visibility if visibility is None else float(visibility)
    tau0 = init.pop("tau_offset_fs", None)
    tau0 = 0.0 if tau0 is None else float(tau0)
    if init:
        raise ConfigError(f"unknown fit.init keys: {sorted(init)}")

    free = _expand_free(fc.free, n)
    if not free:
        raise ConfigError("fit.free lists no parameters")
    model = FitModel.default(F, lines, amplitude=amplitude, baseline=baseline, visibility=visibility,
                             tau_offset=tau0 * FS, sign=cfg.medium.sign_convention, weighting=fc.weighting,
                             free_globals=GLOBAL_PARAMETERS)
    params = dict(model.parameters)
    for name in params:
        params[name] = replace(params[name], free=name in free)
    unknown = free - set(params)
    if unknown:
        raise ConfigError(f"free parameters not in model: {sorted(unknown)}")

    scale = {"t2_fs": FS, "tau_offset_fs": FS}
    for key, (lo, hi) in (fc.bounds or {}).items():
        base = key[:-3] if key.endswith("_fs") else key
        targets = [p for p in params if p == base or (p.rsplit("_", 1)[0] == base and p[-1].isdigit())]
        if not targets:
            raise ConfigError(f"fit.bounds refers to unknown parameter {key!r}")
        f = scale.get(key, 1.0)
        for p in targets:
            params[p] = replace(params[p], lower=lo * f, upper=hi * f)
    for name, p in params.items():
        if p.free and not p.lower <= p.value <= p.upper:
            raise ConfigError(f"initial value of {name} lies outside its bounds")
    try:
        return FitModel(F, params, n, cfg.medium.sign_convention, fc.weighting)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def fit(cfg: RunConfig, data: Union[CountTrace, DipTrace], F: ComplexSpectrum = None) -> FitResult:
    F = build_field(cfg) if F is None else F
    model = build_fit_model(cfg, F, data)
    return fit_dip(model, data, model.initial(), max_iter=cfg.fit.max_iter)


def analyze_spectrum(cfg: RunConfig, spectrum, filter_spectrum=None):
    if filter_spectrum is not None:
        spectrum = normalize_to_filter(spectrum, filter_spectrum)
    a = cfg.analysis
    return extract_lines(spectrum, cfg.source.center_wavelength_nm, a.max_lines, min_depth=a.min_depth,
                         floor=a.transmission_floor, sign=cfg.medium.sign_convention)


def fit_report(result: FitResult, cfg: RunConfig) -> dict:
    return {
        "converged": result.converged,
        "message": result.message,
        "r_squared": result.r_squared,
        "cost": result.cost,
        "n_iterations": result.n_iterations,
        "sigma_convention": "1-sigma from the linearized covariance at the optimum",
        "parameters": result.table(),
        "t2_fs": result.t2_fs(),
        "t2_sigma_fs": [result.sigma(n) / FS for n in result.names if n.startswith("t2_")],
        "config": cfg.to_dict(),
    }



def _roundtrip_one(cfg: RunConfig, seed: int, F: ComplexSpectrum) -> dict:
    counts, _ = synthesize(cfg, seed, F)
    result = fit(cfg, counts, F)
    return {
        "seed": seed,
        "t2_fs": result.t2_fs(),
        "t2_sigma_fs": [result.sigma(n) / FS for n in result.names if n.startswith("t2_")],
        "r_squared": result.r_squared,
        "converged": result.converged,
    }


def roundtrip_study(cfg: RunConfig, seeds, F: ComplexSpectrum = None, workers: int = 1) -> List[dict]:
    """Synthesize and refit once per seed; return per-seed T2 estimates with their fit diagnostics.

    Results are in seed order and do not depend on ``workers``.
    """
    F = build_field(cfg) if F is None else F
    seeds = [int(s) for s in seeds]
    if workers <= 1:
        return [_roundtrip_one(cfg, s, F) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_roundtrip_one, [cfg] * len(seeds), seeds, [F] * len(seeds)))
