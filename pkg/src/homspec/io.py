"""Column-text readers and writers for traces and spectra, plus JSON reports.

Files carry optional ``# key: value`` metadata lines, then one header line of
column names, then rows separated by commas or whitespace.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .analysis import LineEstimate, TransmissionSpectrum
from .engine import CountTrace, DipTrace
from .errors import InvalidArgument
from .medium import Tabulated
from .spectral import ComplexSpectrum, SpectralGrid
from .units import FS, SPEED_OF_LIGHT, nm_to_angular_detuning

#: double-pass delay line: 2/c, expressed in fs per micrometre of stage travel
DEFAULT_STAGE_TO_DELAY_FS_PER_UM = 2.0 * 1e-6 / SPEED_OF_LIGHT / FS

_SPLIT = re.compile(r"[,\s]+")


class DataError(ValueError):
    """A data file is missing or malformed."""


def read_columns(path) -> Tuple[List[str], np.ndarray, Dict[str, str]]:
    """Return ``(column_names, rows, metadata)``; names are empty if the file has no header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    meta, names, rows = {}, [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            if rows or names:
                raise DataError(f"{path}:{lineno}: non-numeric row {raw!r}") from None
            names = fields
    if not rows:
        raise DataError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: rows have differing column counts {sorted(widths)}")
    data = np.array(rows)
    if names and len(names) != data.shape[1]:
        raise DataError(f"{path}: header has {len(names)} names for {data.shape[1]} columns")
    return names, data, meta


def write_columns(path, names, columns, meta: Optional[dict] = None, fmt=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = fmt or ["%.10g"] * len(names)
    with path.open("w") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}: {v}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f % v for f, v in zip(fmt, row)) + "\n")


def write_dip_trace(path, trace: DipTrace, meta: Optional[dict] = None):
    meta = {"normalization": trace.normalization, **(meta or {})}
    write_columns(path, ["delay_fs", "rate"], [trace.delays / FS, trace.rates], meta, ["%.6f", "%.12g"])


def read_dip_trace(path) -> DipTrace:
    names, data, meta = read_columns(path)
    if data.shape[1] < 2:
        raise DataError(f"{path}: expected columns delay_fs, rate")
    try:
        return DipTrace(data[:, 0] * FS, data[:, 1], meta.get("normalization", "baseline-one"))
    except InvalidArgument as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_count_trace(path, trace: CountTrace, meta: Optional[dict] = None):
    write_columns(path, ["delay_fs", "counts", "acquisition_s"],
           [trace.delays / FS, trace.counts, trace.acquisition_time_per_point], meta,
           ["%.6f", "%d", "%.6g"])


def read_count_trace(path, delay_unit: Optional[str] = None,
                     stage_to_delay_fs_per_um: float = DEFAULT_STAGE_TO_DELAY_FS_PER_UM,
                     acquisition_s: float = 1.0) -> CountTrace:
    """Read ``delay, counts[, acquisition_s]`` rows.

    The delay column is in fs unless ``delay_unit='stage_um'`` or the header
    names it ``stage_um``, in which case it is converted with
    ``stage_to_delay_fs_per_um``.
    """
    names, data, _ = read_columns(path)
    if data.shape[1] < 2:
        raise DataError(f"{path}: expected at least columns delay, counts")
    unit = delay_unit or ("stage_um" if names and names[0].lower().startswith("stage") else "fs")
    if unit not in ("fs", "stage_um"):
        raise DataError(f"unknown delay unit {unit!r}")
    if stage_to_delay_fs_per_um <= 0:
        raise DataError("stage-to-delay factor must be positive")
    delays_fs = data[:, 0] * (stage_to_delay_fs_per_um if unit == "stage_um" else 1.0)
    acq = data[:, 2] if data.shape[1] > 2 else acquisition_s
    order = np.argsort(delays_fs, kind="stable")
    try:
        acq = acq[order] if np.ndim(acq) else acq
        return CountTrace(delays_fs[order] * FS, data[order, 1], acq)
    except InvalidArgument as exc:
        raise DataError(f"{path}: {exc}") from exc


def read_spectrum(path) -> TransmissionSpectrum:
    """Two columns ``wavelength_nm, value``, sorted by wavelength on read."""
    _, data, _ = read_columns(path)
    if data.shape[1] < 2:
        raise DataError(f"{path}: expected columns wavelength_nm, value")
    order = np.argsort(data[:, 0])
    try:
        return TransmissionSpectrum(data[order, 0], data[order, 1])
    except InvalidArgument as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_spectrum(path, spectrum: TransmissionSpectrum, meta: Optional[dict] = None, value="transmission"):
    write_columns(path, ["wavelength_nm", value], [spectrum.wavelengths, spectrum.transmission], meta)


def read_tabulated_medium(path, center_wavelength: float, sign: int = 1) -> Tabulated:
    """Three columns ``wavelength_nm, re, im``; resampled onto a uniform detuning grid if needed."""
    _, data, _ = read_columns(path)
    if data.shape[1] < 3:
        raise DataError(f"{path}: expected columns wavelength_nm, re, im")
    nu = nm_to_angular_detuning(data[:, 0] - center_wavelength, center_wavelength, sign)
    order = np.argsort(nu)
    nu, h = nu[order], data[order, 1] + 1j * data[order, 2]
    if np.any(np.diff(nu) <= 0):
        raise DataError(f"{path}: duplicate wavelengths")
    uniform = np.linspace(nu[0], nu[-1], nu.size)
    if not np.allclose(uniform, nu, rtol=0, atol=1e-9 * (nu[-1] - nu[0])):
        h = np.interp(uniform, nu, h.real) + 1j * np.interp(uniform, nu, h.imag)
    return Tabulated(ComplexSpectrum(SpectralGrid(center_wavelength, uniform), h))


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def line_report(lines: List[LineEstimate], center_wavelength: float) -> List[dict]:
    return [
        {"detuning_nm": l.detuning_nm, "wavelength_nm": center_wavelength + l.detuning_nm,
         "alpha_l": l.alpha_l, "fwhm_nm": l.fwhm_nm, "t2_thin_fs": l.t2_thin_estimate / FS,
         "converged": l.converged}
        for l in lines
    ]
