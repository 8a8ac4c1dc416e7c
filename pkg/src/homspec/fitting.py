"""Extract T2 and nuisance parameters from coincidence-count traces."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .engine import CountTrace, DipKernel, DipTrace
from .errors import InvalidArgument, UndefinedStatistic
from .lm import levenberg_marquardt, param_uncertainties
from .medium import Identity, LorentzLine, Lorentzian, transfer_function
from .spectral import ComplexSpectrum
from .units import FS

GLOBAL_PARAMETERS = ("amplitude", "baseline", "visibility", "tau_offset")
LINE_FIELDS = ("detuning_nm", "alpha_l", "t2")
UNITS = {"amplitude": "counts", "baseline": "counts", "visibility": "", "tau_offset": "s",
         "detuning_nm": "nm", "alpha_l": "", "t2": "s"}

# |F|^2 below this fraction of its peak is dropped from the fit model (~1e-12 relative effect)
FIT_SUPPORT_RTOL = 1e-10


@dataclass(frozen=True)
class Parameter:
    """A model parameter. ``scale`` is its typical magnitude, used for finite-difference steps."""

    value: float
    free: bool = True
    lower: float = -np.inf
    upper: float = np.inf
    scale: float = 1.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise InvalidArgument(f"lower bound {self.lower} must be below upper bound {self.upper}")
        if self.scale <= 0:
            raise InvalidArgument("parameter scale must be positive")


def _line_name(field_name: str, k: int) -> str:
    return f"{field_name}_{k}"


def unit_of(name: str) -> str:
    base = name.rsplit("_", 1)[0] if name[-1].isdigit() else name
    return UNITS.get(base, "")


@dataclass
class FitModel:
    """Counts model ``amplitude * P_c(tau) / baseline_rate + baseline``.

    Parameters are keyed by name: the globals ``amplitude``, ``baseline``,
    ``visibility``, ``tau_offset`` and per-line ``detuning_nm_k``,
    ``alpha_l_k``, ``t2_k`` (k counts from 0). Times are in seconds.
    """

    F: ComplexSpectrum
    parameters: Dict[str, Parameter]
    n_lines: int = 0
    sign: int = 1
    weighting: str = "none"
    support_rtol: float = FIT_SUPPORT_RTOL
    _kernel: Optional[DipKernel] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.weighting not in ("none", "poisson"):
            raise InvalidArgument("weighting must be 'none' or 'poisson'")
        missing = [n for n in self.names if n not in self.parameters]
        if missing:
            raise InvalidArgument(f"missing parameters: {missing}")
        if not self.free_names:
            raise InvalidArgument("a fit model needs at least one free parameter")
        for k in range(self.n_lines):
            t2 = self.parameters[_line_name("t2", k)]
            if t2.lower <= 0:
                raise InvalidArgument("T2 bounds must be positive")

    @classmethod
    def default(cls, F: ComplexSpectrum, lines: Sequence[LorentzLine], *, amplitude: float,
                baseline: float = 0.0, visibility: float = 1.0, tau_offset: float = 0.0,
                sign: int = 1, weighting: str = "none", free_globals=GLOBAL_PARAMETERS,
                free_line_fields=("t2",), t2_bounds=(1.0 * FS, 20000.0 * FS)) -> "FitModel":
        """T2 per line free within ``t2_bounds``; detuning and alphaL fixed; globals free."""
        params = {
            "amplitude": Parameter(amplitude, "amplitude" in free_globals, 0.0, np.inf, max(abs(amplitude), 1.0)),
            "baseline": Parameter(baseline, "baseline" in free_globals, -np.inf, np.inf, max(abs(amplitude), 1.0)),
            "visibility": Parameter(visibility, "visibility" in free_globals, 0.0, 1.0, 1.0),
            "tau_offset": Parameter(tau_offset, "tau_offset" in free_globals, -5000 * FS, 5000 * FS, 100 * FS),
        }
        for k, line in enumerate(lines):
            params[_line_name("detuning_nm", k)] = Parameter(
                line.detuning_nm, "detuning_nm" in free_line_fields, -200.0, 200.0, 1.0)
            params[_line_name("alpha_l", k)] = Parameter(
                line.optical_thickness, "alpha_l" in free_line_fields, 0.0, 100.0, 1.0)
            params[_line_name("t2", k)] = Parameter(
                line.t2, "t2" in free_line_fields, t2_bounds[0], t2_bounds[1], line.t2)
        return cls(F, params, len(lines), sign, weighting)

    @property
    def names(self) -> List[str]:
        out = list(GLOBAL_PARAMETERS)
        for k in range(self.n_lines):
            out += [_line_name(f, k) for f in LINE_FIELDS]
        return out

    @property
    def free_names(self) -> List[str]:
        return [n for n in self.names if self.parameters[n].free]

    def initial(self) -> np.ndarray:
        return np.array([self.parameters[n].value for n in self.free_names])

    def bounds(self):
        free = [self.parameters[n] for n in self.free_names]
        return np.array([p.lower for p in free]), np.array([p.upper for p in free])

    def scales(self) -> np.ndarray:
        return np.array([self.parameters[n].scale for n in self.free_names])

    def with_values(self, values: Dict[str, float]) -> "FitModel":
        params = dict(self.parameters)
        for name, v in values.items():
            params[name] = replace(params[name], value=float(v))
        return FitModel(self.F, params, self.n_lines, self.sign, self.weighting, self.support_rtol)

    def full_values(self, params) -> Dict[str, float]:
        params = np.asarray(params, dtype=float)
        free = self.free_names
        if params.shape != (len(free),):
            raise InvalidArgument(f"expected {len(free)} free parameter values, got {params.shape}")
        lower, upper = self.bounds()
        if np.any(params < lower) or np.any(params > upper):
            bad = [n for n, v, lo, hi in zip(free, params, lower, upper) if not lo <= v <= hi]
            raise InvalidArgument(f"parameters out of bounds: {bad}")
        values = {n: self.parameters[n].value for n in self.names}
        values.update(zip(free, params))
        return values

    def lines(self, values: Dict[str, float]) -> List[LorentzLine]:
        return [
            LorentzLine(values[_line_name("detuning_nm", k)], values[_line_name("alpha_l", k)],
                        values[_line_name("t2", k)])
            for k in range(self.n_lines)
        ]

    def medium(self, values: Dict[str, float]):
        if self.n_lines == 0:
            return Identity()
        return Lorentzian(self.lines(values), self.sign)

    def _kernel_for(self, delays) -> DipKernel:
        delays = np.asarray(delays, dtype=float)
        k = self._kernel
        if k is None or k.delays.shape != delays.shape or not np.array_equal(k.delays, delays):
            k = DipKernel(self.F, delays, self.support_rtol)
            self._kernel = k
        return k

    def normalized_rates(self, values: Dict[str, float], delays) -> np.ndarray:
        H = transfer_function(self.medium(values), self.F.grid)
        return self._kernel_for(delays).rates(H, values["visibility"], values["tau_offset"])

    def predict(self, values: Dict[str, float], delays) -> np.ndarray:
        """Expected counts at each delay."""
        return values["amplitude"] * self.normalized_rates(values, delays) + values["baseline"]


def observed(data: Union[CountTrace, DipTrace]) -> np.ndarray:
    """Values to fit: counts of a :class:`CountTrace` or rates of a noiseless :class:`DipTrace`."""
    if isinstance(data, CountTrace):
        return data.counts.astype(float)
    if isinstance(data, DipTrace):
        return data.rates
    raise InvalidArgument(f"cannot fit data of type {type(data).__name__}")


def residuals(model: FitModel, params, data: Union[CountTrace, DipTrace]) -> np.ndarray:
    """``observed - model``; divided by ``sqrt(max(observed, 1))`` with Poisson weighting."""
    values = model.full_values(params)
    y = observed(data)
    r = y - model.predict(values, data.delays)
    if model.weighting == "poisson":
        r = r / np.sqrt(np.maximum(y, 1))
    return r


def r_squared(predicted, observed) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``."""
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if predicted.shape != observed.shape or observed.size < 2:
        raise InvalidArgument("need two equal-length vectors with at least two points")
    ss_tot = float(np.sum((observed - observed.mean()) ** 2))
    if ss_tot == 0:
        raise UndefinedStatistic("observed values are all equal; R^2 is undefined")
    ss_res = float(np.sum((observed - predicted) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class FitResult:
    names: List[str]
    estimates: np.ndarray
    sigmas: np.ndarray
    free: np.ndarray
    r_squared: float
    cost: float
    n_iterations: int
    converged: bool
    message: str = ""
    cost_history: List[float] = field(default_factory=list)
    best_fit: Optional[DipTrace] = None
    model_counts: Optional[np.ndarray] = None

    def value(self, name: str) -> float:
        return float(self.estimates[self.names.index(name)])

    def sigma(self, name: str) -> float:
        return float(self.sigmas[self.names.index(name)])

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, map(float, self.estimates)))

    def t2_fs(self) -> List[float]:
        return [self.value(n) / FS for n in self.names if n.startswith("t2_")]

    def table(self) -> List[dict]:
        return [
            {"parameter": n, "estimate": float(v), "sigma": float(s), "unit": unit_of(n),
             "status": "free" if f else "fixed"}
            for n, v, s, f in zip(self.names, self.estimates, self.sigmas, self.free)
        ]


def fit_dip(model: FitModel, data: Union[CountTrace, DipTrace], init=None, *, max_iter: int = 500) -> FitResult:
    """Damped least-squares fit of ``model`` to ``data`` starting from ``init`` (free parameters)."""
    x0 = model.initial() if init is None else np.asarray(init, dtype=float)
    lower, upper = model.bounds()
    if x0.shape != lower.shape:
        raise InvalidArgument(f"init must hold {lower.size} free-parameter values")
    if np.any(x0 < lower) or np.any(x0 > upper):
        raise InvalidArgument("init lies outside the parameter bounds")

    lm = levenberg_marquardt(lambda p: residuals(model, p, data), x0, lower, upper, model.scales(),
                             max_iter=max_iter)
    values = model.full_values(lm.x)
    try:
        free_sigma = param_uncertainties(lm.jacobian, lm.residuals)
    except UndefinedStatistic:
        free_sigma = np.full(lm.x.size, np.nan)

    names = model.names
    free_set = model.free_names
    sig = dict(zip(free_set, free_sigma))
    predicted = model.predict(values, data.delays)
    best = DipTrace(data.delays, model.normalized_rates(values, data.delays))
    return FitResult(
        names=names,
        estimates=np.array([values[n] for n in names]),
        sigmas=np.array([sig.get(n, 0.0) for n in names]),
        free=np.array([n in sig for n in names]),
        r_squared=r_squared(predicted, observed(data)),
        cost=lm.cost,
        n_iterations=lm.n_iterations,
        converged=lm.converged,
        message=lm.message,
        cost_history=lm.cost_history,
        best_fit=best,
        model_counts=predicted,
    )
