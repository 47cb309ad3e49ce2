"""Fourier-side primitives on the interval [-1/2, 1/2].

Coefficients are stored densely for k = -K..K, so ``values[k + K]`` is the
coefficient of ``exp(i 2 pi k x)``.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from .errors import (
    FrequencyOverflowError,
    InputValidationError,
    IntegrationError,
    NonInvertibleDistortionError,
    ShapeMismatchError,
    SymmetryViolationError,
)

GridVariant = Literal["simulation", "model"]

QUAD_EPSABS = 1e-12
HERMITIAN_TOL = 1e-12
INVERTIBILITY_FLOOR = 1e-14


@dataclass(frozen=True)
class DesignGrid:
    """Uniform design ``x_j``, ``j = -n..n``.

    ``variant="simulation"`` gives ``x_j = j/(2n+1)`` (FFT-friendly),
    ``variant="model"`` gives ``x_j = j/(2n)``.
    """

    n: int
    variant: GridVariant = "simulation"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InputValidationError(f"half-count n must be a positive integer, got {self.n}")
        if self.variant not in ("simulation", "model"):
            raise InputValidationError(f"unknown grid variant {self.variant!r}")

    @property
    def size(self) -> int:
        return 2 * self.n + 1

    def __len__(self) -> int:
        return self.size

    @property
    def points(self) -> NDArray[np.float64]:
        j = np.arange(-self.n, self.n + 1, dtype=float)
        denom = self.size if self.variant == "simulation" else 2 * self.n
        return j / denom

    @classmethod
    def from_points(cls, x: ArrayLike, atol: float = 1e-9) -> "DesignGrid":
        """Recognise which uniform grid a set of design points belongs to."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise InputValidationError("design needs at least 3 points")
        if x.size % 2 == 0:
            raise InputValidationError(
                f"design must have an odd number of points (2n+1), got {x.size}"
            )
        if np.any(np.diff(x) <= 0):
            raise InputValidationError("design points must be strictly increasing")
        n = (x.size - 1) // 2
        for variant in ("simulation", "model"):
            grid = cls(n, variant)
            if np.allclose(x, grid.points, rtol=0.0, atol=atol):
                return grid
        raise InputValidationError(
            "design points must be x_j = j/(2n+1) or x_j = j/(2n), j = -n..n"
        )


@dataclass(frozen=True, eq=False)
class Sample:
    """Observed pairs ``(x_j, Y_j)`` on a uniform design grid."""

    grid: DesignGrid
    responses: NDArray[np.float64]

    def __post_init__(self):
        y = np.array(self.responses, dtype=float)
        if y.shape != (self.grid.size,):
            raise ShapeMismatchError(
                f"expected {self.grid.size} responses for n={self.grid.n}, got shape {y.shape}"
            )
        if not np.all(np.isfinite(y)):
            raise InputValidationError("responses must be finite")
        y.setflags(write=False)
        object.__setattr__(self, "responses", y)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def x(self) -> NDArray[np.float64]:
        return self.grid.points


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """Complex Fourier coefficients indexed ``k = -K..K``."""

    values: NDArray[np.complex128]

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 1 or v.size % 2 == 0:
            raise ShapeMismatchError("coefficient vector must have odd length 2K+1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, max_freq: int) -> "SpectralCoefficients":
        return cls(np.zeros(2 * max_freq + 1, dtype=complex))

    @classmethod
    def ones(cls, max_freq: int) -> "SpectralCoefficients":
        """Coefficients of the identity convolution (a point mass at 0)."""
        return cls(np.ones(2 * max_freq + 1, dtype=complex))

    @classmethod
    def from_dict(cls, coeffs: dict[int, complex], max_freq: int) -> "SpectralCoefficients":
        v = np.zeros(2 * max_freq + 1, dtype=complex)
        for k, c in coeffs.items():
            if abs(k) > max_freq:
                raise FrequencyOverflowError(f"frequency {k} beyond max_freq {max_freq}")
            v[k + max_freq] = c
        return cls(v)

    @property
    def max_freq(self) -> int:
        return (self.values.size - 1) // 2

    @property
    def frequencies(self) -> NDArray[np.int64]:
        K = self.max_freq
        return np.arange(-K, K + 1)

    def __getitem__(self, k: int) -> complex:
        K = self.max_freq
        if abs(k) > K:
            return 0j
        return complex(self.values[k + K])

    def __len__(self) -> int:
        return self.values.size

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.all(np.abs(self.values - np.conj(self.values[::-1])) <= tol))

    def resized(self, max_freq: int) -> "SpectralCoefficients":
        """Truncate or zero-pad to a new frequency range."""
        K = self.max_freq
        out = np.zeros(2 * max_freq + 1, dtype=complex)
        m = min(K, max_freq)
        out[max_freq - m : max_freq + m + 1] = self.values[K - m : K + m + 1]
        return SpectralCoefficients(out)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


def _check_same_range(a: SpectralCoefficients, b: SpectralCoefficients) -> None:
    if a.max_freq != b.max_freq:
        raise ShapeMismatchError(
            f"coefficient ranges differ: max_freq {a.max_freq} vs {b.max_freq}"
        )


def empirical_fourier_coefficients(
    sample: Sample, max_freq: int | None = None
) -> SpectralCoefficients:
    """Empirical coefficients ``R(k) = (2n+1)^-1 sum_j Y_j exp(-i 2 pi k x_j)``.

    On the simulation grid the sum is a DFT of length 2n+1 and is computed
    with the FFT; on the model grid it is summed directly.
    """
    n = sample.n
    if max_freq is None:
        max_freq = n
    if max_freq > n:
        raise FrequencyOverflowError(
            f"max_freq={max_freq} exceeds n={n}; higher frequencies alias on the design"
        )
    if sample.grid.variant == "simulation":
        full = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(sample.responses))) / sample.grid.size
        return SpectralCoefficients(full[n - max_freq : n + max_freq + 1])
    return SpectralCoefficients(_direct_coefficients(sample.x, sample.responses, max_freq))


def _direct_coefficients(x, y, max_freq):
    k = np.arange(-max_freq, max_freq + 1)
    phase = np.exp(-2j * np.pi * np.outer(k, x))
    return phase @ y / len(y)


def evaluate_series(coeffs: SpectralCoefficients, x: ArrayLike) -> float | NDArray[np.float64]:
    """Evaluate ``sum_k c_k exp(i 2 pi k x)`` at real points.

    Raises
    ------
    SymmetryViolationError
        If the imaginary part of the sum exceeds 1e-8, meaning the
        coefficients do not describe a real function.
    """
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    phase = np.exp(2j * np.pi * np.outer(flat, coeffs.frequencies))
    vals = phase @ coeffs.values
    resid = np.max(np.abs(vals.imag)) if vals.size else 0.0
    if resid > 1e-8:
        raise SymmetryViolationError(
            f"series has imaginary residue {resid:.3g}; coefficients are not Hermitian"
        )
    out = vals.real.reshape(xa.shape)
    return float(out) if xa.ndim == 0 else out


def evaluate_on_grid(coeffs: SpectralCoefficients, grid: DesignGrid) -> NDArray[np.float64]:
    """Evaluate a band-limited series (``K <= n``) on the design grid.

    Uses the inverse FFT on the simulation grid and direct summation otherwise.
    """
    n, K = grid.n, coeffs.max_freq
    if grid.variant != "simulation" or K > n:
        return evaluate_series(coeffs, grid.points)
    full = np.zeros(grid.size, dtype=complex)
    full[n - K : n + K + 1] = coeffs.values
    vals = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(full))) * grid.size
    if np.max(np.abs(vals.imag)) > 1e-8:
        raise SymmetryViolationError("series on grid is not real-valued")
    return vals.real


def apply_convolution(
    theta: SpectralCoefficients, psi: SpectralCoefficients
) -> SpectralCoefficients:
    """Convolution on the circle: coefficientwise product ``Theta(k) Psi(k)``."""
    _check_same_range(theta, psi)
    return SpectralCoefficients(theta.values * psi.values)


def parseval_l2_distance(a: SpectralCoefficients, b: SpectralCoefficients) -> float:
    """Squared L2 distance on [-1/2, 1/2] of the two series, via Parseval."""
    _check_same_range(a, b)
    return float(np.sum(np.abs(a.values - b.values) ** 2))


# -- coefficients of functions by quadrature -------------------------------------


def _quad(func, lo, hi, weight=None, wvar=None):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        kwargs = dict(epsabs=QUAD_EPSABS, epsrel=1e-12, limit=400)
        if weight is not None and wvar != 0:
            val, err = integrate.quad(func, lo, hi, weight=weight, wvar=wvar, **kwargs)
        elif weight == "sin":
            val, err = 0.0, 0.0
        else:
            val, err = integrate.quad(func, lo, hi, **kwargs)
    if caught and err > 1e-9:
        raise IntegrationError(f"quadrature did not converge on [{lo}, {hi}] (error {err:.2g})")
    return val


def fourier_coefficients_of(
    func: Callable[[float], float],
    max_freq: int,
    *,
    even: bool = False,
    breakpoints: tuple[float, ...] = (0.0,),
) -> SpectralCoefficients:
    """Coefficients ``int f(u) exp(-i 2 pi k u) du`` over [-1/2, 1/2] by quadrature.

    Oscillatory weights are handled by QUADPACK's QAWO routine. For even
    functions only the cosine part is integrated (the sine part vanishes).
    Interior ``breakpoints`` split the interval at kinks.
    """
    edges = [-0.5, *sorted(b for b in breakpoints if -0.5 < b < 0.5), 0.5]
    out = np.zeros(2 * max_freq + 1, dtype=complex)
    for k in range(0, max_freq + 1):
        w = 2.0 * np.pi * k
        re = sum(_quad(func, lo, hi, "cos", w) for lo, hi in zip(edges[:-1], edges[1:]))
        im = 0.0
        if not even:
            im = -sum(_quad(func, lo, hi, "sin", w) for lo, hi in zip(edges[:-1], edges[1:]))
        out[max_freq + k] = complex(re, im)
        out[max_freq - k] = complex(re, -im)
    return SpectralCoefficients(out)


# -- distortion ----------------------------------------------------------------------


@dataclass(frozen=True)
class DistortionSpec:
    """Known convolution density ``psi`` on [-1/2, 1/2].

    Parameters
    ----------
    kind
        ``"laplace_truncated"`` (Laplace density with the given ``scale``,
        restricted to the interval and renormalised), ``"uniform"``, or
        ``"custom"`` with a user ``density`` callback.
    ill_posedness_b, gamma_threshold, c_psi_lower, c_psi_upper
        Declared decay envelope ``C < |k|^b |Psi(k)| < C*`` for ``|k| > Gamma``,
        checked by :func:`check_ill_posedness`.
    """

    kind: Literal["laplace_truncated", "uniform", "custom"] = "laplace_truncated"
    scale: float = 1.0
    density: Callable[[float], float] | None = field(default=None, compare=True)
    ill_posedness_b: float = 2.0
    gamma_threshold: float = 1.0
    c_psi_lower: float | None = None
    c_psi_upper: float | None = None

    def __post_init__(self):
        if self.kind not in ("laplace_truncated", "uniform", "custom"):
            raise InputValidationError(f"unknown distortion kind {self.kind!r}")
        if self.kind == "custom" and self.density is None:
            raise InputValidationError("custom distortion needs a density callback")
        if self.scale <= 0:
            raise InputValidationError("scale must be positive")
        if self.ill_posedness_b <= 0 or self.gamma_threshold <= 0:
            raise InputValidationError("ill_posedness_b and gamma_threshold must be positive")

    @classmethod
    def laplace(cls, scale: float = 1.0, **kwargs) -> "DistortionSpec":
        return cls(kind="laplace_truncated", scale=scale, **kwargs)

    def pdf(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= 0.5
        if self.kind == "laplace_truncated":
            lam = self.scale
            norm = 1.0 - np.exp(-0.5 / lam)
            vals = np.exp(-np.abs(x) / lam) / (2.0 * lam * norm)
        elif self.kind == "uniform":
            vals = np.ones_like(x)
        else:
            vals = np.vectorize(self.density, otypes=[float])(x)
        return np.where(inside, vals, 0.0)

    @property
    def is_even(self) -> bool:
        return self.kind != "custom"

    def validate_density(self, tol: float = 1e-10, n_check: int = 201) -> None:
        """Check positivity on the interval and unit mass."""
        grid = np.linspace(-0.5, 0.5, n_check)
        if np.any(self.pdf(grid) <= 0):
            raise InputValidationError("distortion density must be positive on [-1/2, 1/2]")
        mass = sum(
            _quad(lambda u: float(self.pdf(u)), lo, hi) for lo, hi in ((-0.5, 0.0), (0.0, 0.5))
        )
        if abs(mass - 1.0) > tol:
            raise InputValidationError(f"distortion density integrates to {mass!r}, not 1")


def distortion_coefficients(
    spec: DistortionSpec,
    max_freq: int,
    mode: Literal["quadrature", "closed_form"] = "quadrature",
    require_invertible: bool = True,
) -> SpectralCoefficients:
    """Fourier coefficients ``Psi(k)`` of the distortion density.

    ``mode="quadrature"`` integrates the truncated, renormalised density.
    ``mode="closed_form"`` uses ``1/(1 + 4 pi^2 scale^2 k^2)`` for the Laplace
    kind, which is the transform of the untruncated Laplace law; for a
    truncated density with a visible tail mass the two differ at odd k.
    """
    psi = _distortion_coefficients_cached(spec, int(max_freq), mode)
    if require_invertible:
        bad = np.abs(psi.values) < INVERTIBILITY_FLOOR
        if np.any(bad):
            k = int(psi.frequencies[np.argmax(bad)])
            raise NonInvertibleDistortionError(
                f"|Psi({k})| < {INVERTIBILITY_FLOOR}; the convolution cannot be inverted"
            )
    return psi


@functools.lru_cache(maxsize=64)
def _distortion_coefficients_cached(spec, max_freq, mode):
    k = np.arange(-max_freq, max_freq + 1)
    if mode == "closed_form":
        if spec.kind == "laplace_truncated":
            vals = 1.0 / (1.0 + (2.0 * np.pi * spec.scale * k) ** 2)
        elif spec.kind == "uniform":
            vals = (k == 0).astype(float)
        else:
            raise InputValidationError("closed-form coefficients exist only for built-in kinds")
        return SpectralCoefficients(vals.astype(complex))
    if mode != "quadrature":
        raise InputValidationError(f"unknown coefficient mode {mode!r}")
    spec.validate_density()
    psi = fourier_coefficients_of(lambda u: float(spec.pdf(u)), max_freq, even=spec.is_even)
    if abs(psi[0] - 1.0) > 1e-10:
        raise IntegrationError(f"Psi(0) = {psi[0]!r} differs from 1")
    return psi


def check_ill_posedness(
    spec: DistortionSpec,
    max_freq: int,
    mode: Literal["quadrature", "closed_form"] = "quadrature",
) -> bool:
    """Whether ``C < |k|^b |Psi(k)| < C*`` holds for every ``Gamma < |k| <= max_freq``."""
    if spec.c_psi_lower is None or spec.c_psi_upper is None:
        raise InputValidationError("c_psi_lower and c_psi_upper must be declared to validate")
    psi = distortion_coefficients(spec, max_freq, mode)
    k = psi.frequencies
    sel = np.abs(k) > spec.gamma_threshold
    scaled = np.abs(k[sel]) ** spec.ill_posedness_b * np.abs(psi.values[sel])
    return bool(np.all((scaled > spec.c_psi_lower) & (scaled < spec.c_psi_upper)))
