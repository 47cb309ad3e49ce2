"""Monte-Carlo harness: signals, data generation, per-replication pipeline, tables."""

from __future__ import annotations

import functools
import logging
import math
import secrets
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bootstrap import (
    BootstrapConfig,
    SelectionGrid,
    SmoothErrorDistribution,
    select_g_opt,
)
from .ecdf import ErrorModel, asymptotic_covariance, residual_ecdf
from .errors import DeconvError, InputValidationError, NumericalError
from .estimator import (
    Distortion,
    _weights,
    estimate_theta,
    ise,
    pilot_h,
    resolve_psi,
    residuals,
)
from .kernel import SmoothingKernelSpec
from .riskhull import (
    CUTOFF_KERNEL,
    RiskHullConfig,
    cutoff_h,
    select_cutoff_risk_hull,
    spectral_cutoff_estimate,
)
from .spectral import (
    DesignGrid,
    DistortionSpec,
    Sample,
    SpectralCoefficients,
    empirical_fourier_coefficients,
    evaluate_series,
    fourier_coefficients_of,
)

log = logging.getLogger(__name__)

METHODS = ("bootstrap", "ise_oracle", "risk_hull", "bootstrap_cutoff")
T_POINTS = (-2.0, -1.0, 0.0, 1.0, 2.0)


def theta1(x):
    return 3.0 * np.exp(-20.0 * np.asarray(x, dtype=float) ** 2)


def theta2(x):
    x = np.asarray(x, dtype=float)
    return 1.0 + 3.0 * np.cos(3.0 * np.pi * x / 4.0) - 4.0 * np.cos(3.0 * np.pi * x) ** 2


@dataclass(frozen=True)
class SignalSpec:
    """True regression function on [-1/2, 1/2].

    ``custom`` takes either a real ``function`` (coefficients by quadrature)
    or fixed ``coefficients``.
    """

    kind: Literal["theta1", "theta2", "custom"] = "theta1"
    function: Callable | None = None
    coefficients: SpectralCoefficients | None = field(default=None, compare=False)
    even: bool = False

    def __post_init__(self):
        if self.kind not in ("theta1", "theta2", "custom"):
            raise InputValidationError(f"unknown signal {self.kind!r}")
        if self.kind == "custom" and self.function is None and self.coefficients is None:
            raise InputValidationError("custom signal needs a function or coefficients")
        if self.coefficients is not None and not self.coefficients.is_hermitian(1e-12):
            raise InputValidationError("signal coefficients must be Hermitian")

    def __call__(self, x):
        if self.kind == "theta1":
            return theta1(x)
        if self.kind == "theta2":
            return theta2(x)
        if self.function is not None:
            return np.asarray(self.function(np.asarray(x, dtype=float)), dtype=float)
        return evaluate_series(self.coefficients, x)

    def truth(self, max_freq: int) -> SpectralCoefficients:
        """Fourier coefficients on ``|k| <= max_freq``."""
        if self.coefficients is not None:
            return self.coefficients.resized(max_freq)
        return _signal_coefficients(self, max_freq)

    def tail_energy_estimate(self, max_freq: int) -> float:
        """Rough energy beyond ``max_freq``, assuming ``|Theta(k)| ~ k^-2`` decay."""
        c = abs(self.truth(max_freq)[max_freq])
        return 2.0 * c**2 * max_freq / 3.0


@functools.lru_cache(maxsize=32)
def _signal_coefficients(spec: SignalSpec, max_freq: int) -> SpectralCoefficients:
    even = spec.even or spec.kind in ("theta1", "theta2")
    return fourier_coefficients_of(lambda u: float(spec(u)), max_freq, even=even, breakpoints=())


def signal_eval(spec: SignalSpec, x):
    return spec(x)


@dataclass(frozen=True)
class ExperimentConfig:
    signal: SignalSpec = field(default_factory=SignalSpec)
    error_model: ErrorModel = field(default_factory=ErrorModel)
    distortion: DistortionSpec = field(default_factory=lambda: DistortionSpec.laplace(0.1))
    kernel: SmoothingKernelSpec = field(default_factory=SmoothingKernelSpec.paper_sim)
    half_sizes: tuple[int, ...] = (25, 50, 100, 150)
    pilot_constant: float = 5.0
    grid_count: int = 100
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)
    risk_hull: RiskHullConfig = field(default_factory=RiskHullConfig)
    replications: int = 1000
    selection_methods: tuple[str, ...] = ("bootstrap", "ise_oracle")
    master_seed: int | None = None
    t_points: tuple[float, ...] = T_POINTS
    aimse_range: tuple[float, float, int] = (-6.0, 6.0, 601)
    k_truth_factor: int = 4
    max_failure_rate: float = 0.01

    def __post_init__(self):
        if self.replications < 1:
            raise InputValidationError("replications must be at least 1")
        if not self.half_sizes or any(int(n) != n or n < 1 for n in self.half_sizes):
            raise InputValidationError("half_sizes must be a nonempty list of positive integers")
        unknown = set(self.selection_methods) - set(METHODS)
        if unknown or not self.selection_methods:
            raise InputValidationError(f"selection methods must be a nonempty subset of {METHODS}")
        if self.pilot_constant <= 0:
            raise InputValidationError("pilot_constant must be positive")

    def k_truth(self, n: int) -> int:
        return self.k_truth_factor * n


# -- data ----------------------------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _blurred_truth(signal: SignalSpec, distortion: DistortionSpec, n: int, k_truth: int):
    truth = signal.truth(k_truth)
    psi = resolve_psi(distortion, k_truth)
    grid = DesignGrid(n)
    blurred = SpectralCoefficients(truth.values * psi.values)
    values = evaluate_series(blurred, grid.points)
    values.setflags(write=False)
    return truth, values


def generate_sample(config: ExperimentConfig, n: int, rng: np.random.Generator) -> Sample:
    """``Y_j = [K theta](x_j) + eps_j`` on the simulation grid."""
    _, clean = _blurred_truth(config.signal, config.distortion, n, config.k_truth(n))
    errs = config.error_model.sample(rng, clean.size)
    return Sample(DesignGrid(n), clean + errs)


def ise_curve(
    sample: Sample,
    truth: SpectralCoefficients,
    candidates: ArrayLike,
    kernel: SmoothingKernelSpec,
    distortion: Distortion,
) -> NDArray[np.float64]:
    """ISE of the estimator at each candidate, in coefficient space."""
    n = sample.n
    naive = empirical_fourier_coefficients(sample).values / resolve_psi(distortion, n).values
    K = max(n, truth.max_freq)
    inner = truth.resized(n).values
    tail = truth.resized(K).energy() - float(np.sum(np.abs(inner) ** 2))
    W = np.stack([_weights(kernel, g, n) for g in np.atleast_1d(candidates)])
    return np.sum(np.abs(W * naive - inner) ** 2, axis=1) + tail


def oracle_ise_select(
    sample: Sample,
    truth: SpectralCoefficients,
    grid: SelectionGrid | ArrayLike,
    kernel: SmoothingKernelSpec,
    distortion: Distortion,
) -> float:
    """Grid point minimising the (infeasible) ISE against the known truth."""
    cands = grid.points if isinstance(grid, SelectionGrid) else np.sort(np.asarray(grid, float))
    curve = ise_curve(sample, truth, cands, kernel, distortion)
    return float(cands[int(np.argmin(curve))])


# -- experiment ----------------------------------------------------------------------------


@dataclass
class Replicate:
    ise: dict[str, float]
    selected_h: dict[str, float]
    ecdf_dev_t: dict[str, NDArray[np.float64]]
    ecdf_dev_grid: dict[str, NDArray[np.float64]]


def _rng_for(seed: int, n: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, n, rep])))


def _replicate(config: ExperimentConfig, n: int, seed: int, rep: int) -> Replicate:
    rng = _rng_for(seed, n, rep)
    sample = generate_sample(config, n, rng)
    truth = _blurred_truth(config.signal, config.distortion, n, config.k_truth(n))[0]
    dist = config.distortion
    kernel = config.kernel
    pilot = estimate_theta(sample, dist, kernel, pilot_h(n, config.pilot_constant))
    grid = SelectionGrid.default(n, config.grid_count)
    t = np.asarray(config.t_points)
    tg = np.linspace(*config.aimse_range)
    F_t, F_g = config.error_model.cdf(t), config.error_model.cdf(tg)

    out = Replicate({}, {}, {}, {})
    for method in config.selection_methods:
        if method == "bootstrap":
            h = select_g_opt(sample, pilot, grid, kernel, None, config.bootstrap, rng).g_opt
            est = estimate_theta(sample, dist, kernel, h)
        elif method == "ise_oracle":
            h = oracle_ise_select(sample, truth, grid, kernel, dist)
            est = estimate_theta(sample, dist, kernel, h)
        elif method == "risk_hull":
            sigma_sq = float(np.var(residuals(sample, pilot).values, ddof=1))
            m = select_cutoff_risk_hull(sample, dist, sigma_sq, config.risk_hull, rng)
            est = spectral_cutoff_estimate(sample, dist, m)
            h = cutoff_h(m)
        else:  # bootstrap_cutoff
            cands = [cutoff_h(m) for m in range(n + 1)]
            h = select_g_opt(sample, pilot, cands, CUTOFF_KERNEL, None, config.bootstrap, rng).g_opt
            est = estimate_theta(sample, dist, CUTOFF_KERNEL, h)
        F_hat = residual_ecdf(residuals(sample, est))
        out.ise[method] = ise(est, truth)
        out.selected_h[method] = float(h)
        out.ecdf_dev_t[method] = F_hat(t) - F_t
        out.ecdf_dev_grid[method] = F_hat(tg) - F_g
    return out


@dataclass
class MethodStats:
    """Aggregates for one selection method; rows follow ``half_sizes``."""

    bias: NDArray[np.float64]
    variance: NDArray[np.float64]
    amse: NDArray[np.float64]
    aimse: NDArray[np.float64]
    imse: NDArray[np.float64]
    imse_se: NDArray[np.float64]
    selected_h: list[NDArray[np.float64]]
    ise: list[NDArray[np.float64]]


@dataclass
class ResultTable:
    half_sizes: tuple[int, ...]
    t_points: tuple[float, ...]
    methods: dict[str, MethodStats]
    log_ratios: dict[int, NDArray[np.float64]]
    riskhull_log_ratios: dict[int, NDArray[np.float64]]
    failures: dict[int, int]
    replications: int
    master_seed: int

    def sample_sizes(self) -> list[int]:
        return [2 * n + 1 for n in self.half_sizes]


def _aggregate(reps: list[Replicate], method: str, N: int, tg: NDArray[np.float64]):
    d_t = np.stack([r.ecdf_dev_t[method] for r in reps])
    d_g = np.stack([r.ecdf_dev_grid[method] for r in reps])
    bias = math.sqrt(N) * d_t.mean(axis=0)
    var = N * d_t.var(axis=0)
    amse = N * np.mean(d_t**2, axis=0)
    aimse = float(np.trapezoid(N * np.mean(d_g**2, axis=0), tg))
    ise = np.array([r.ise[method] for r in reps])
    se = float(ise.std(ddof=1) / math.sqrt(ise.size)) if ise.size > 1 else math.nan
    return bias, var, amse, aimse, float(ise.mean()), se, np.array([r.selected_h[method] for r in reps]), ise


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Run every replication at every sample size and aggregate the tables.

    Each replication has its own random stream derived from
    ``(master_seed, n, replication)``, and aggregation follows replication
    order, so results do not depend on ``threads``.
    """
    seed = config.master_seed if config.master_seed is not None else secrets.randbits(64)
    tg = np.linspace(*config.aimse_range)
    methods = list(config.selection_methods)
    nt = len(config.t_points)
    blank = lambda: np.full((len(config.half_sizes), nt), np.nan)  # noqa: E731
    stats = {
        m: MethodStats(blank(), blank(), blank(), *(np.full(len(config.half_sizes), np.nan) for _ in range(3)), [], [])
        for m in methods
    }
    log_ratios, rh_ratios, failures = {}, {}, {}

    for i, n in enumerate(config.half_sizes):
        # warm the shared caches before worker threads touch them
        _blurred_truth(config.signal, config.distortion, n, config.k_truth(n))
        resolve_psi(config.distortion, n)

        def task(rep, n=n):
            try:
                return _replicate(config, n, seed, rep)
            except DeconvError as exc:
                log.warning("replication %d at n=%d failed: %s", rep, n, exc)
                return None

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(task, range(config.replications)))
        else:
            results = [task(r) for r in range(config.replications)]
        reps = [r for r in results if r is not None]
        failures[n] = len(results) - len(reps)
        if failures[n] > config.max_failure_rate * config.replications:
            raise NumericalError(
                f"{failures[n]} of {config.replications} replications failed at n={n}"
            )
        log.info("n=%d: %d replications done", n, len(reps))
        for m in methods:
            bias, var, amse, aimse, imse, se, hs, ises = _aggregate(reps, m, 2 * n + 1, tg)
            st = stats[m]
            st.bias[i], st.variance[i], st.amse[i] = bias, var, amse
            st.aimse[i], st.imse[i], st.imse_se[i] = aimse, imse, se
            st.selected_h.append(hs)
            st.ise.append(ises)
        if "bootstrap" in methods and "ise_oracle" in methods:
            log_ratios[n] = np.log(stats["bootstrap"].selected_h[-1] / stats["ise_oracle"].selected_h[-1])
        boot = "bootstrap_cutoff" if "bootstrap_cutoff" in methods else "bootstrap"
        if "risk_hull" in methods and boot in methods:
            rh_ratios[n] = np.log(stats[boot].selected_h[-1] / stats["risk_hull"].selected_h[-1])

    return ResultTable(
        tuple(config.half_sizes), tuple(config.t_points), stats, log_ratios, rh_ratios,
        failures, config.replications, seed,
    )


# -- bootstrap covariance check -------------------------------------------------------------


@dataclass
class CovarianceCheck:
    points: NDArray[np.float64]
    sigma: NDArray[np.float64]
    sigma_star: NDArray[np.float64]
    c_n: float

    @property
    def max_abs_diff(self) -> float:
        return float(np.max(np.abs(self.sigma_star - self.sigma)))


def bootstrap_covariance_check(
    config: ExperimentConfig,
    n: int,
    rng: np.random.Generator,
    *,
    from_regression: bool = False,
    points: ArrayLike = T_POINTS,
) -> CovarianceCheck:
    """Compare the smooth-bootstrap covariance with the true limiting covariance.

    By default the residuals are raw errors drawn from the error model; with
    ``from_regression=True`` they come from a pilot fit to simulated data.
    """
    if from_regression:
        sample = generate_sample(config, n, rng)
        pilot = estimate_theta(sample, config.distortion, config.kernel, pilot_h(n, config.pilot_constant))
        raw = residuals(sample, pilot).values
    else:
        raw = config.error_model.sample(rng, 2 * n + 1)
    dist = SmoothErrorDistribution.from_residuals(
        raw, config.bootstrap.scaling_c_n, config.bootstrap.contaminant
    )
    p = np.asarray(points, dtype=float)
    U, V = np.meshgrid(p, p, indexing="ij")
    return CovarianceCheck(
        p, asymptotic_covariance(config.error_model, U, V), dist.covariance(U, V), dist.c_n
    )
