"""Hong-Ou-Mandel spectroscopy: coincidence-dip modelling and dephasing-time fits."""

from .analysis import (LineEstimate, TransmissionSpectrum, extract_lines, normalize_to_filter,
                       resolution_estimate, transmission_dip_fwhm)
from .config import ConfigError, RunConfig, load_config
from .engine import (CountTrace, DipKernel, DipTrace, EngineConfig, coincidence_rate, coincidence_rates,
                     simulate_dip, synthesize_counts)
from .errors import CalibrationError, DomainError, InvalidArgument, UndefinedStatistic
from .fitting import FitModel, FitResult, fit_dip
from .io import DataError
from .medium import (Identity, LorentzLine, Lorentzian, Tabulated, intensity_transmission, optical_depth,
                     thin_sample_t2_from_fwhm, thin_sample_t2_from_nm, transfer_function)
from .spectral import (ComplexSpectrum, FilterSpec, PhaseMatchSpec, SpectralGrid, biphoton_amplitude,
                       build_grid, default_grid, minimum_phase)
from .units import FS, angular_detuning_to_nm, nm_to_angular_detuning
from .fixtures import fixture_config, fixture_path

__version__ = "0.1.0"
