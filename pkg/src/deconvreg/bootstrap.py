"""Smooth residual bootstrap and bootstrap-IMSE selection of the regularization."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, stats

from .errors import DegenerateDistributionError, InputValidationError
from .estimator import (
    Distortion,
    RegularizedEstimate,
    ResidualSet,
    _weights,
    fitted_values,
    resolve_psi,
    residuals,
)
from .kernel import SmoothingKernelSpec
from .spectral import DesignGrid, Sample

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Contaminant:
    """Centred continuous law ``U`` added to resampled residuals."""

    pdf: Callable
    cdf: Callable
    sampler: Callable[[np.random.Generator, tuple], NDArray[np.float64]]
    lower_partial_mean: Callable | None = None
    variance: float = 1.0
    name: str = "custom"

    @classmethod
    def standard_normal(cls) -> "Contaminant":
        return cls(
            pdf=stats.norm.pdf,
            cdf=stats.norm.cdf,
            sampler=lambda rng, size: rng.standard_normal(size),
            lower_partial_mean=lambda z: -stats.norm.pdf(z),
            variance=1.0,
            name="standard_normal",
        )

    def partial_mean(self, z):
        """``E[U 1(U <= z)]``."""
        if self.lower_partial_mean is not None:
            return self.lower_partial_mean(z)
        f = np.vectorize(
            lambda zz: integrate.quad(lambda u: u * self.pdf(u), -np.inf, zz, epsabs=1e-13)[0]
        )
        return f(z)


@dataclass(frozen=True)
class BootstrapConfig:
    replications_B: int = 200
    contaminant: Contaminant = field(default_factory=Contaminant.standard_normal)
    scaling_c_n: float | Literal["auto_silverman"] = "auto_silverman"
    rng_seed: int | None = None

    def __post_init__(self):
        if self.replications_B < 1:
            raise InputValidationError("need at least one bootstrap replication")
        if self.scaling_c_n != "auto_silverman" and not self.scaling_c_n >= 0:
            raise InputValidationError("explicit c_n must be nonnegative")


@dataclass(frozen=True)
class SelectionGrid:
    """Equally spaced inclusive grid of candidate regularization parameters."""

    lower: float
    upper: float
    count: int = 100

    def __post_init__(self):
        if not 0 < self.lower < self.upper:
            raise InputValidationError("selection grid needs 0 < lower < upper")
        if self.count < 2:
            raise InputValidationError("selection grid needs at least 2 points")

    @classmethod
    def default(cls, n: int, count: int = 100) -> "SelectionGrid":
        """``[N^(-1/10), 10 N^(-1/12) log(N)^(1/12)]`` with ``N = 2n+1``."""
        N = 2 * n + 1
        return cls(N ** (-0.1), 10 * N ** (-1 / 12) * math.log(N) ** (1 / 12), count)

    @property
    def points(self) -> NDArray[np.float64]:
        return np.linspace(self.lower, self.upper, self.count)


# -- smooth error law -----------------------------------------------------------------


def center_residuals(residuals: ResidualSet | ArrayLike) -> NDArray[np.float64]:
    r = np.asarray(residuals.values if isinstance(residuals, ResidualSet) else residuals, float)
    if r.size == 0:
        raise InputValidationError("no residuals to centre")
    return r - r.mean()


def silverman_cn(centered: ArrayLike) -> float:
    """``1.06 * sd * N^(-1/5)`` with the sample standard deviation."""
    e = np.asarray(centered, dtype=float)
    if e.size < 2:
        raise InputValidationError("Silverman's rule needs at least two residuals")
    c = 1.06 * float(np.std(e, ddof=1)) * e.size ** (-0.2)
    if c == 0.0:
        log.warning("residuals are constant; smoothing scale c_n is 0 (degenerate)")
    return c


@dataclass(frozen=True, eq=False)
class SmoothErrorDistribution:
    """Law of ``eps* = eps_tilde_J + c_n U`` with ``J`` uniform on the residuals."""

    centered_residuals: NDArray[np.float64]
    c_n: float
    contaminant: Contaminant = field(default_factory=Contaminant.standard_normal)

    def __post_init__(self):
        e = np.array(self.centered_residuals, dtype=float)
        if e.size == 0:
            raise InputValidationError("smooth error law needs residuals")
        if abs(e.mean()) > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
            raise InputValidationError("residuals must be centred")
        if not self.c_n > 0:
            raise DegenerateDistributionError(
                "smoothing scale c_n must be positive; the bootstrap law would be discrete"
            )
        e.setflags(write=False)
        object.__setattr__(self, "centered_residuals", e)

    @classmethod
    def from_residuals(cls, residuals, c_n=None, contaminant=None) -> "SmoothErrorDistribution":
        e = center_residuals(residuals)
        c = silverman_cn(e) if c_n is None or c_n == "auto_silverman" else float(c_n)
        return cls(e, c, contaminant or Contaminant.standard_normal())

    def _z(self, t):
        t = np.asarray(t, dtype=float)
        return (t[..., None] - self.centered_residuals) / self.c_n, t

    def cdf(self, t):
        z, t = self._z(t)
        out = self.contaminant.cdf(z).mean(axis=-1)
        return float(out) if t.ndim == 0 else out

    def pdf(self, t):
        z, t = self._z(t)
        out = self.contaminant.pdf(z).mean(axis=-1) / self.c_n
        return float(out) if t.ndim == 0 else out

    def partial_mean(self, t):
        """``E*[eps* 1(eps* <= t)]``."""
        z, t = self._z(t)
        e = self.centered_residuals
        terms = e * self.contaminant.cdf(z) + self.c_n * self.contaminant.partial_mean(z)
        out = terms.mean(axis=-1)
        return float(out) if t.ndim == 0 else out

    @property
    def mean(self) -> float:
        return float(self.centered_residuals.mean())

    @property
    def variance(self) -> float:
        return float(np.mean(self.centered_residuals**2) + self.c_n**2 * self.contaminant.variance)

    def covariance(self, u, v):
        """Limiting covariance with the smooth law plugged in for ``F``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        Fu, Fv, fu, fv = self.cdf(u), self.cdf(v), self.pdf(u), self.pdf(v)
        return (
            self.cdf(np.minimum(u, v))
            - Fu * Fv
            + fu * self.partial_mean(v)
            + fv * self.partial_mean(u)
            + self.variance * fu * fv
        )


def sample_smooth_errors(
    dist: SmoothErrorDistribution, count: int | tuple, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Draws from the smooth bootstrap error law; ``count`` may be a shape."""
    if not dist.c_n > 0:
        raise DegenerateDistributionError("c_n must be positive")
    e = dist.centered_residuals
    idx = rng.integers(0, e.size, size=count)
    return e[idx] + dist.c_n * dist.contaminant.sampler(rng, idx.shape)


def smooth_cdf(dist: SmoothErrorDistribution, t):
    return dist.cdf(t)


def smooth_density(dist: SmoothErrorDistribution, t):
    return dist.pdf(t)


# -- bootstrap IMSE ------------------------------------------------------------------------


def _rowwise_coefficients(Y: NDArray[np.float64], grid: DesignGrid) -> NDArray[np.complex128]:
    n, N = grid.n, grid.size
    if grid.variant == "simulation":
        F = np.fft.fft(np.fft.ifftshift(Y, axes=-1), axis=-1)
        return np.fft.fftshift(F, axes=-1) / N
    k = np.arange(-n, n + 1)
    return Y @ np.exp(-2j * np.pi * np.outer(grid.points, k)) / N


def _as_generator(rng, config: BootstrapConfig) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(config.rng_seed if rng is None else rng)


@dataclass
class BootstrapCurve:
    candidates: NDArray[np.float64]
    imse: NDArray[np.float64]
    std_errors: NDArray[np.float64]
    c_n: float
    replicate_distances: NDArray[np.float64] | None = None


def bootstrap_imse_curve(
    sample: Sample,
    pilot: RegularizedEstimate,
    candidates: ArrayLike,
    kernel: SmoothingKernelSpec,
    distortion: Distortion | None = None,
    config: BootstrapConfig | None = None,
    rng: np.random.Generator | int | None = None,
    *,
    keep_replicates: bool = False,
) -> BootstrapCurve:
    """Monte-Carlo ``IMSE*(g)`` for every candidate ``g`` from shared bootstrap draws.

    Each replication draws ``Y* = K theta_hat(x_j) + eps*_j`` once; the same
    ``Y*`` is re-estimated at every candidate (common random numbers). The
    squared distance to the pilot is evaluated in coefficient space.
    """
    config = config or BootstrapConfig()
    rng = _as_generator(rng, config)
    grid, n = sample.grid, sample.n
    psi = pilot.psi
    if distortion is not None:
        expected = resolve_psi(distortion, n).values
        if not np.allclose(expected, psi.values, rtol=1e-10, atol=1e-14):
            raise InputValidationError("pilot was built with a different distortion")
    gs = np.atleast_1d(np.asarray(candidates, dtype=float))

    dist = SmoothErrorDistribution.from_residuals(
        residuals(sample, pilot), config.scaling_c_n, config.contaminant
    )
    errs = sample_smooth_errors(dist, (config.replications_B, grid.size), rng)
    Ystar = fitted_values(pilot, sample)[None, :] + errs
    A = _rowwise_coefficients(Ystar, grid) / psi.values
    p = pilot.coefficients.values
    W = np.stack([_weights(kernel, g, n) for g in gs])

    # |W A - p|^2 summed over k, expanded so every (replicate, g) pair is a matmul
    d = (np.abs(A) ** 2) @ (W**2).T - 2.0 * (A * np.conj(p)).real @ W.T + np.sum(np.abs(p) ** 2)
    d = np.maximum(d, 0.0)
    B = d.shape[0]
    se = d.std(axis=0, ddof=1) / math.sqrt(B) if B > 1 else np.zeros(gs.size)
    return BootstrapCurve(gs, d.mean(axis=0), se, dist.c_n, d if keep_replicates else None)


def bootstrap_imse(
    sample: Sample,
    pilot: RegularizedEstimate,
    g: float,
    kernel: SmoothingKernelSpec,
    distortion: Distortion | None = None,
    config: BootstrapConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> float:
    """Bootstrap estimate of the IMSE of the estimator at regularization ``g``."""
    curve = bootstrap_imse_curve(sample, pilot, [g], kernel, distortion, config, rng)
    return float(curve.imse[0])


@dataclass
class SelectionResult:
    g_opt: float
    objective_curve: NDArray[np.float64]
    candidates: NDArray[np.float64]
    std_errors: NDArray[np.float64]
    c_n: float

    def __iter__(self):
        return iter((self.g_opt, self.objective_curve))


def select_g_opt(
    sample: Sample,
    pilot: RegularizedEstimate,
    grid: SelectionGrid | ArrayLike,
    kernel: SmoothingKernelSpec,
    distortion: Distortion | None = None,
    config: BootstrapConfig | None = None,
    rng: np.random.Generator | int | None = None,
) -> SelectionResult:
    """Minimise the bootstrap IMSE over the candidate grid.

    Ties go to the smallest candidate. Unpacks as ``g_opt, curve``.
    """
    cands = grid.points if isinstance(grid, SelectionGrid) else np.asarray(grid, dtype=float)
    order = np.argsort(cands, kind="stable")
    cands = cands[order]
    curve = bootstrap_imse_curve(sample, pilot, cands, kernel, distortion, config, rng)
    i = int(np.argmin(curve.imse))
    return SelectionResult(float(cands[i]), curve.imse, cands, curve.std_errors, curve.c_n)
