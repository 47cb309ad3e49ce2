"""Regularized deconvolution estimator, residuals and IMSE-related formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputValidationError, ShapeMismatchError
from .kernel import AssumptionProfile, SmoothingKernelSpec, spectral_weights
from .spectral import (
    DistortionSpec,
    Sample,
    SpectralCoefficients,
    distortion_coefficients,
    empirical_fourier_coefficients,
    evaluate_on_grid,
    evaluate_series,
    parseval_l2_distance,
)

Distortion = DistortionSpec | SpectralCoefficients


def resolve_psi(
    distortion: Distortion, max_freq: int, mode: Literal["quadrature", "closed_form"] = "quadrature"
) -> SpectralCoefficients:
    """Distortion coefficients on ``-max_freq..max_freq``.

    Accepts either a :class:`DistortionSpec` or precomputed coefficients
    (e.g. ``SpectralCoefficients.ones(n)`` for the identity operator).
    """
    if isinstance(distortion, SpectralCoefficients):
        if distortion.max_freq < max_freq:
            raise ShapeMismatchError(
                f"distortion coefficients cover |k| <= {distortion.max_freq}, need {max_freq}"
            )
        return distortion.resized(max_freq)
    return distortion_coefficients(distortion, max_freq, mode)


@dataclass(frozen=True, eq=False)
class RegularizedEstimate:
    """Fitted signal: coefficients ``Lambda(h k) R(k) / Psi(k)`` for ``|k| <= n``."""

    coefficients: SpectralCoefficients
    regularization_h: float
    kernel: SmoothingKernelSpec
    distortion: Distortion
    psi: SpectralCoefficients

    @property
    def max_freq(self) -> int:
        return self.coefficients.max_freq

    def __call__(self, x: ArrayLike):
        return evaluate_series(self.coefficients, x)

    def blurred_coefficients(self) -> SpectralCoefficients:
        return SpectralCoefficients(self.coefficients.values * self.psi.values)


@dataclass(frozen=True, eq=False)
class ResidualSet:
    values: NDArray[np.float64]
    source_h: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise InputValidationError("residuals must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


def _check_h(h: float) -> None:
    if not (h > 0 and math.isfinite(h)):
        raise InputValidationError(f"regularization parameter must be positive, got {h}")


def _weights(kernel: SmoothingKernelSpec, h: float, n: int) -> NDArray[np.float64]:
    w = spectral_weights(kernel.with_cutoff(h * n), h, n)
    k = np.arange(-n, n + 1)
    if np.any(np.abs(w) > 1.0) or np.any(w[np.abs(h * k) <= kernel.flat_radius] != 1.0):
        raise InputValidationError("kernel violates the flat-region / boundedness requirements")
    return w


def estimate_theta(
    sample: Sample,
    distortion: Distortion,
    kernel: SmoothingKernelSpec,
    h: float,
    *,
    mode: Literal["quadrature", "closed_form"] = "quadrature",
) -> RegularizedEstimate:
    """Spectrally regularized inverse of the convolution.

    The kernel profile is applied at the shrunken frequencies ``h k`` and the
    sum runs over ``|k| <= n``; equivalently the kernel's hard cutoff is set to
    ``h n`` for this sample.
    """
    _check_h(h)
    n = sample.n
    psi = resolve_psi(distortion, n, mode)
    rhat = empirical_fourier_coefficients(sample)
    coeffs = _weights(kernel, h, n) * rhat.values / psi.values
    return RegularizedEstimate(SpectralCoefficients(coeffs), float(h), kernel, distortion, psi)


def fitted_values(estimate: RegularizedEstimate, sample: Sample) -> NDArray[np.float64]:
    """``[K theta_hat](x_j)`` at each design point."""
    if estimate.max_freq != sample.n:
        raise ShapeMismatchError(
            f"estimate has max_freq {estimate.max_freq} but the sample has n={sample.n}"
        )
    return evaluate_on_grid(estimate.blurred_coefficients(), sample.grid)


def residuals(sample: Sample, estimate: RegularizedEstimate) -> ResidualSet:
    return ResidualSet(sample.responses - fitted_values(estimate, sample), estimate.regularization_h)


def ise(estimate: RegularizedEstimate | SpectralCoefficients, truth: SpectralCoefficients) -> float:
    """Integrated squared error against known truth coefficients.

    The truth may extend beyond the estimate's range; its energy there is
    counted in full since the estimate vanishes at those frequencies.
    """
    est = estimate.coefficients if isinstance(estimate, RegularizedEstimate) else estimate
    K = max(est.max_freq, truth.max_freq)
    return parseval_l2_distance(est.resized(K), truth.resized(K))


def integrated_variance_formula(
    sigma_sq: float,
    kernel: SmoothingKernelSpec,
    psi: Distortion,
    h: float,
    n: int,
) -> float:
    """``sigma^2/(2n+1) * sum_{|k|<=n} Lambda(hk)^2 / |Psi(k)|^2``."""
    _check_h(h)
    if sigma_sq < 0:
        raise InputValidationError("sigma_sq must be nonnegative")
    p = resolve_psi(psi, n).values
    w = _weights(kernel, h, n)
    return float(sigma_sq / (2 * n + 1) * np.sum(w**2 / np.abs(p) ** 2))


def rule_of_thumb_h(
    profile: AssumptionProfile,
    c_lambda: float,
    c_r: float,
    sigma_sq: float,
    n: int,
) -> float:
    """Approximately IMSE-optimal regularization from the variance/bias balance.

    Uses ``2n+1`` as the sample size.
    """
    if min(c_lambda, c_r, sigma_sq) <= 0 or n < 1:
        raise InputValidationError("constants, sigma_sq and n must all be positive")
    s, b = profile.smoothness_s, profile.ill_posedness_b
    r = 1.0 / (2 * s + 2 * b + 1)
    return ((2 * b + 1) / (2 * s) * c_lambda / c_r * sigma_sq) ** r * (2 * n + 1) ** (-r)


def pilot_h(n: int, constant: float, s: float = 3.0, b: float = 2.0) -> float:
    """Pilot regularization ``C (2n+1)^(-r) log(2n+1)^r`` with ``r = 1/(2s+2b+1)``."""
    if constant <= 0:
        raise InputValidationError("pilot constant must be positive")
    N = 2 * n + 1
    r = 1.0 / (2 * s + 2 * b + 1)
    return constant * N ** (-r) * math.log(N) ** r


def deconvolution_kernel(
    kernel: SmoothingKernelSpec, psi: SpectralCoefficients, h: float, u: ArrayLike
):
    """Weight function ``W_h(u) = sum_{|k|<=n} Lambda(hk)/Psi(k) exp(i 2 pi k u)``.

    ``n`` is taken from ``psi.max_freq``. The estimator equals
    ``(2n+1)^-1 sum_j Y_j W_h(x - x_j)``.
    """
    n = psi.max_freq
    return evaluate_series(SpectralCoefficients(_weights(kernel, h, n) / psi.values), u)
