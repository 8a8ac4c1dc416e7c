"""Run configuration: one YAML document per run.

Relative paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import yaml

from .engine import EngineConfig
from .errors import InvalidArgument
from .fitting import GLOBAL_PARAMETERS, LINE_FIELDS
from .io import DEFAULT_STAGE_TO_DELAY_FS_PER_UM, DataError, read_tabulated_medium
from .medium import Identity, LorentzLine, Lorentzian
from .spectral import DEFAULT_MAGNITUDE_FLOOR, DEFAULT_N_POINTS, FilterSpec, PhaseMatchSpec
from .units import FS

#: 0.5 um stage step on a double-pass delay line
DEFAULT_DELAY_STEP_FS = 0.5 * DEFAULT_STAGE_TO_DELAY_FS_PER_UM


class ConfigError(ValueError):
    """Configuration is malformed or refers to missing files."""


@dataclass
class SourceConfig:
    center_wavelength_nm: float = 815.0
    filter_center_nm: float = 815.0
    top_width_nm: float = 15.5
    slope_width_nm: float = 3.3
    magnitude_floor: float = DEFAULT_MAGNITUDE_FLOOR
    intensity_fwhm_nm: Optional[float] = 22.0
    argument_scale_s2: Optional[float] = None
    spectrum_file: Optional[str] = None

    def filter_spec(self) -> FilterSpec:
        return FilterSpec(self.filter_center_nm, self.top_width_nm, self.slope_width_nm, self.magnitude_floor)

    def phase_match_spec(self) -> PhaseMatchSpec:
        return PhaseMatchSpec(self.intensity_fwhm_nm, self.argument_scale_s2)


@dataclass
class LineConfig:
    detuning_nm: float
    alpha_l: float
    t2_fs: float

    def line(self) -> LorentzLine:
        return LorentzLine.from_fs(self.detuning_nm, self.alpha_l, self.t2_fs)


@dataclass
class MediumConfig:
    kind: str = "identity"
    sign_convention: int = 1
    lines: List[LineConfig] = field(default_factory=list)
    tabulated_file: Optional[str] = None

    def line_objects(self) -> List[LorentzLine]:
        return [lc.line() for lc in self.lines]


@dataclass
class EngineBlock:
    n_points: int = DEFAULT_N_POINTS
    half_span_rad_s: Optional[float] = None
    visibility: float = 0.92
    tau_offset_fs: float = 0.0
    tau_min_fs: float = -600.0
    tau_max_fs: float = 2400.0
    tau_step_fs: float = DEFAULT_DELAY_STEP_FS
    normalization: str = "baseline-one"

    def engine_config(self) -> EngineConfig:
        return EngineConfig(self.visibility, self.tau_offset_fs * FS, self.n_points, self.normalization)

    def delays(self) -> np.ndarray:
        n = int(np.floor((self.tau_max_fs - self.tau_min_fs) / self.tau_step_fs + 1e-9)) + 1
        return (self.tau_min_fs + self.tau_step_fs * np.arange(n)) * FS


@dataclass
class SynthConfig:
    peak_rate: float = 6000.0
    dark_coincidence_rate: float = 0.0
    acquisition_s: float = 0.8
    seed: int = 0


@dataclass
class FitConfig:
    free: List[str] = field(default_factory=lambda: ["amplitude", "tau_offset", "t2"])
    init: Dict[str, Union[float, List[float], None]] = field(default_factory=dict)
    bounds: Dict[str, List[float]] = field(default_factory=dict)
    weighting: str = "none"
    max_iter: int = 500


@dataclass
class IOConfig:
    output: Optional[str] = None
    plot_data: Optional[str] = None
    data: Optional[str] = None
    spectrum: Optional[str] = None
    filter_spectrum: Optional[str] = None
    #: None infers the unit from the data header
    delay_unit: Optional[str] = None
    stage_to_delay_fs_per_um: float = DEFAULT_STAGE_TO_DELAY_FS_PER_UM


@dataclass
class AnalysisConfig:
    max_lines: int = 5
    min_depth: float = 0.2
    transmission_floor: float = 1e-4


@dataclass
class RunConfig:
    source: SourceConfig = field(default_factory=SourceConfig)
    medium: MediumConfig = field(default_factory=MediumConfig)
    engine: EngineBlock = field(default_factory=EngineBlock)
    synth: SynthConfig = field(default_factory=SynthConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    io: IOConfig = field(default_factory=IOConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    base_dir: Path = field(default_factory=Path.cwd, repr=False)

    def resolve(self, p: Optional[str]) -> Optional[Path]:
        if p is None:
            return None
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def medium_object(self):
        m = self.medium
        if m.kind == "identity":
            return Identity()
        if m.kind == "lorentzian":
            return Lorentzian(m.line_objects(), m.sign_convention)
        try:
            return read_tabulated_medium(self.resolve(m.tabulated_file), self.source.center_wavelength_nm,
                                         m.sign_convention)
        except DataError as exc:
            raise ConfigError(str(exc)) from exc


_SECTIONS = {
    "source": SourceConfig,
    "medium": MediumConfig,
    "engine": EngineBlock,
    "synth": SynthConfig,
    "fit": FitConfig,
    "io": IOConfig,
    "analysis": AnalysisConfig,
}


def _build(cls, data, section):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    known = set(cls.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"section '{section}': {exc}") from exc


def config_from_dict(raw: dict, base_dir: Optional[Path] = None) -> RunConfig:
    raw = copy.deepcopy(raw or {})
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    source = raw.get("source")
    if isinstance(source, dict) and source.get("argument_scale_s2") is not None:
        source.setdefault("intensity_fwhm_nm", None)
    medium = raw.get("medium") or {}
    if isinstance(medium, dict) and "lines" in medium:
        medium["lines"] = [_build(LineConfig, ln, "medium.lines") for ln in medium["lines"] or []]
    sections = {name: _build(cls, raw.get(name), name) for name, cls in _SECTIONS.items()}
    cfg = RunConfig(**sections, base_dir=base_dir or Path.cwd())
    validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return config_from_dict(raw, path.resolve().parent)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def validate(cfg: RunConfig):
    """Check cross-field invariants; raise :class:`ConfigError` on the first problem."""
    try:
        cfg.source.filter_spec()
        cfg.source.phase_match_spec()
        cfg.engine.engine_config()
        if cfg.medium.kind == "lorentzian":
            Lorentzian(cfg.medium.line_objects(), cfg.medium.sign_convention)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.source.center_wavelength_nm <= 0:
        raise ConfigError("center wavelength must be positive")
    if cfg.medium.kind not in ("identity", "lorentzian", "tabulated"):
        raise ConfigError(f"unknown medium kind {cfg.medium.kind!r}")
    if cfg.medium.kind == "tabulated":
        p = cfg.resolve(cfg.medium.tabulated_file)
        if p is None or not p.exists():
            raise ConfigError(f"tabulated medium file not found: {cfg.medium.tabulated_file}")
    if cfg.source.spectrum_file is not None and not cfg.resolve(cfg.source.spectrum_file).exists():
        raise ConfigError(f"SPDC spectrum file not found: {cfg.source.spectrum_file}")
    e = cfg.engine
    if e.n_points < 2 or e.n_points % 2:
        raise ConfigError("engine.n_points must be even and at least 2")
    if e.tau_step_fs <= 0 or e.tau_max_fs < e.tau_min_fs:
        raise ConfigError("delay range needs tau_step_fs > 0 and tau_max_fs >= tau_min_fs")
    s = cfg.synth
    if s.peak_rate < 0 or s.dark_coincidence_rate < 0 or s.acquisition_s <= 0:
        raise ConfigError("synth rates must be non-negative and acquisition_s positive")
    if cfg.io.stage_to_delay_fs_per_um <= 0:
        raise ConfigError("io.stage_to_delay_fs_per_um must be positive")
    if cfg.io.delay_unit not in (None, "fs", "stage_um"):
        raise ConfigError("io.delay_unit, when set, must be 'fs' or 'stage_um'")
    f = cfg.fit
    if f.weighting not in ("none", "poisson"):
        raise ConfigError("fit.weighting must be 'none' or 'poisson'")
    allowed = set(GLOBAL_PARAMETERS) | set(LINE_FIELDS)
    for name in f.free:
        base = name.rsplit("_", 1)[0] if name[-1].isdigit() else name
        if name not in allowed and base not in LINE_FIELDS:
            raise ConfigError(f"unknown free parameter {name!r}")
    for name, pair in f.bounds.items():
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2 and pair[0] < pair[1]):
            raise ConfigError(f"fit.bounds.{name} must be [lower, upper] with lower < upper")
    if cfg.analysis.max_lines < 1:
        raise ConfigError("analysis.max_lines must be at least 1")
