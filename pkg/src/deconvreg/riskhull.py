"""Spectral cut-off estimates with a penalized empirical-risk (risk hull) cutoff."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .errors import FrequencyOverflowError, InputValidationError
from .estimator import Distortion, RegularizedEstimate, estimate_theta, resolve_psi
from .kernel import SmoothingKernelSpec
from .spectral import Sample, empirical_fourier_coefficients

CUTOFF_KERNEL = SmoothingKernelSpec.spectral_cutoff(1.0)


@dataclass(frozen=True)
class RiskHullConfig:
    """Parameters of the penalized cutoff criterion.

    ``penalty_mode="monte_carlo"`` estimates the penalty by simulation with
    ``draws`` Gaussian vectors. ``"approximate_scaled"`` uses a Gaussian
    approximation of the same quantile, multiplied by ``scale``.
    ``max_cutoff=None`` means the largest resolvable frequency ``n``.
    ``unbiased_risk=True`` subtracts ``2 s_k`` instead of ``s_k`` per
    frequency, so the unpenalized criterion estimates the cut-off risk.

    The penalty is a fixed function of the noise levels; simulation only
    approximates it. With ``penalty_seed`` set, the unit-variance penalty is
    simulated once from that seed and cached; with ``None`` it is redrawn
    from the caller's rng on every call.
    """

    alpha: float = 1.1
    penalty_mode: Literal["monte_carlo", "approximate_scaled"] = "monte_carlo"
    draws: int = 10_000
    scale: float = 0.1
    max_cutoff: int | None = None
    penalty_seed: int | None = 0
    unbiased_risk: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise InputValidationError("alpha must be nonnegative")
        if self.penalty_mode not in ("monte_carlo", "approximate_scaled"):
            raise InputValidationError(f"unknown penalty mode {self.penalty_mode!r}")
        if self.draws < 10:
            raise InputValidationError("penalty simulation needs at least 10 draws")


def cutoff_h(m: int) -> float:
    """Regularization giving the pass band ``|k| <= m`` under the unit indicator kernel."""
    return 1.0 / (m + 0.5)


def spectral_cutoff_estimate(sample: Sample, distortion: Distortion, m: int) -> RegularizedEstimate:
    """Keep frequencies ``|k| <= m`` of the naive inverse, drop the rest."""
    if m < 0:
        raise InputValidationError("cutoff must be nonnegative")
    if m > sample.n:
        raise FrequencyOverflowError(f"cutoff {m} exceeds n={sample.n}")
    return estimate_theta(sample, distortion, CUTOFF_KERNEL, cutoff_h(m))


def risk_hull_penalty(
    noise_levels: np.ndarray,
    level: float,
    config: RiskHullConfig,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Penalty ``pen(m)`` for ``m = 0..M`` from per-frequency noise variances.

    ``noise_levels[i]`` is the variance of frequency ``k = i`` (``i = 0..M``).
    The fluctuation for cutoff ``m`` sums ``s_k (Z_k^2 - 1)`` over the
    ``2m+1`` frequencies ``|k| <= m``; ``pen(m)`` is its ``level`` quantile,
    made nondecreasing in ``m``.
    """
    s = np.asarray(noise_levels, dtype=float)
    # each |k| > 0 counts twice: real and imaginary parts of the pair (k, -k)
    mult = np.where(np.arange(s.size) == 0, 1.0, 2.0)
    if config.penalty_mode == "monte_carlo":
        if rng is None:
            raise InputValidationError("monte_carlo penalty needs an rng")
        z2 = rng.chisquare(1, size=(config.draws, s.size))
        z2[:, 1:] += rng.chisquare(1, size=(config.draws, s.size - 1))
        fluct = np.cumsum(s * (z2 - mult), axis=1)
        pen = np.quantile(fluct, level, axis=0)
    else:
        sd = np.sqrt(np.cumsum(2.0 * mult * s**2))
        pen = config.scale * stats.norm.ppf(level) * sd
    return np.maximum.accumulate(np.maximum(pen, 0.0))


@functools.lru_cache(maxsize=64)
def _cached_unit_penalty(unit_levels: bytes, level: float, config: RiskHullConfig) -> np.ndarray:
    rng = np.random.default_rng(config.penalty_seed)
    pen = risk_hull_penalty(np.frombuffer(unit_levels), level, config, rng)
    pen.setflags(write=False)
    return pen


@dataclass
class RiskHullResult:
    cutoff: int
    criterion: np.ndarray
    penalty: np.ndarray


def risk_hull_criterion(
    sample: Sample,
    distortion: Distortion,
    sigma_sq_hat: float,
    config: RiskHullConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> RiskHullResult:
    """Criterion over cutoffs ``m = 0..max_cutoff``.

    ``U(m) = -sum_{|k|<=m} (|X_k|^2 - s_k) + (1 + alpha) pen(m)`` with
    ``X_k = R_hat(k)/Psi(k)`` and ``s_k = sigma^2 / ((2n+1)|Psi(k)|^2)``.
    The first sum is an unbiased estimate of ``-sum_{|k|<=m} |theta_k|^2``.
    With ``config.unbiased_risk`` each term subtracts ``2 s_k`` and the
    unpenalized criterion estimates the cut-off risk up to a constant.
    Ties go to the smallest cutoff.
    """
    config = config or RiskHullConfig()
    if sigma_sq_hat < 0:
        raise InputValidationError("sigma_sq_hat must be nonnegative")
    n = sample.n
    M = n if config.max_cutoff is None else config.max_cutoff
    if M > n:
        raise FrequencyOverflowError(f"max_cutoff {M} exceeds n={n}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    psi = resolve_psi(distortion, n).values
    x = empirical_fourier_coefficients(sample).values / psi
    N = 2 * n + 1
    s = sigma_sq_hat / (N * np.abs(psi) ** 2)
    # fold (k, -k) pairs: index m collects frequencies with |k| = m
    c = 2.0 if config.unbiased_risk else 1.0
    gain = np.abs(x[n:]) ** 2 - c * s[n:]
    gain[1:] += np.abs(x[n - 1 :: -1]) ** 2 - c * s[n - 1 :: -1]
    gain = gain[: M + 1]
    if sigma_sq_hat > 0 and config.penalty_seed is not None:
        unit = 1.0 / (N * np.abs(psi[n : n + M + 1]) ** 2)
        pen = sigma_sq_hat * _cached_unit_penalty(unit.tobytes(), 1.0 - 1.0 / N, config)
    elif sigma_sq_hat > 0:
        pen = risk_hull_penalty(s[n : n + M + 1], 1.0 - 1.0 / N, config, rng)
    else:
        pen = np.zeros(M + 1)
    crit = -np.cumsum(gain) + (1.0 + config.alpha) * pen
    return RiskHullResult(int(np.argmin(crit)), crit, pen)


def select_cutoff_risk_hull(
    sample: Sample,
    distortion: Distortion,
    sigma_sq_hat: float,
    config: RiskHullConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> int:
    """Number of Fourier frequencies kept by the risk hull method."""
    return risk_hull_criterion(sample, distortion, sigma_sq_hat, config, rng).cutoff
