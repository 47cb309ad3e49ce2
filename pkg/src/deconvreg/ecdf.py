"""Residual empirical distribution function and its limiting covariance."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, stats

from .errors import InputValidationError, IntegrationError
from .estimator import ResidualSet


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Right-continuous step function ``t -> #{values <= t} / size``."""

    sorted_values: NDArray[np.float64]

    def __post_init__(self):
        v = np.sort(np.asarray(self.sorted_values, dtype=float))
        if v.size == 0:
            raise InputValidationError("ECDF needs at least one value")
        v.setflags(write=False)
        object.__setattr__(self, "sorted_values", v)

    @property
    def size(self) -> int:
        return self.sorted_values.size

    def __call__(self, t: ArrayLike):
        ta = np.asarray(t, dtype=float)
        out = np.searchsorted(self.sorted_values, ta, side="right") / self.size
        return float(out) if ta.ndim == 0 else out


def residual_ecdf(residuals: ResidualSet | ArrayLike) -> Ecdf:
    values = residuals.values if isinstance(residuals, ResidualSet) else residuals
    if np.size(values) == 0:
        raise InputValidationError("cannot build an ECDF from no residuals")
    return Ecdf(values)


@dataclass(frozen=True)
class ErrorModel:
    """Centred error law with standard deviation ``sd``.

    ``student_t`` is scaled so that its standard deviation (not its scale
    parameter) equals ``sd``; this needs ``df > 2``.
    """

    kind: Literal["normal", "student_t"] = "normal"
    sd: float = 2.0 / 3.0
    df: int = 4

    def __post_init__(self):
        if self.kind not in ("normal", "student_t"):
            raise InputValidationError(f"unknown error model {self.kind!r}")
        if self.sd < 0:
            raise InputValidationError("sd must be nonnegative")
        if self.kind == "student_t" and self.df <= 2:
            raise InputValidationError("student_t errors need df > 2 for a finite variance")

    @classmethod
    def normal(cls, sd: float = 2.0 / 3.0) -> "ErrorModel":
        return cls("normal", sd)

    @classmethod
    def student_t(cls, df: int = 4, sd: float = 2.0 / 3.0) -> "ErrorModel":
        return cls("student_t", sd, df)

    @property
    def scale(self) -> float:
        """Scale parameter of the underlying location-scale family."""
        if self.kind == "normal":
            return self.sd
        return self.sd / math.sqrt(self.df / (self.df - 2))

    @property
    def variance(self) -> float:
        return self.sd**2

    @functools.cached_property
    def _dist(self):
        if self.kind == "normal":
            return stats.norm(scale=self.scale)
        return stats.t(self.df, scale=self.scale)

    def cdf(self, t):
        return self._dist.cdf(t)

    def pdf(self, t):
        return self._dist.pdf(t)

    def partial_mean(self, t):
        """``E[eps 1(eps <= t)]`` in closed form.

        Normal: ``-sd^2 f(t)``. Student t with ``nu`` degrees of freedom and
        scale ``a``: ``-a (nu + z^2)/(nu - 1) f_nu(z)`` with ``z = t/a``.
        """
        t = np.asarray(t, dtype=float)
        if self.kind == "normal":
            return -self.variance * self.pdf(t)
        a, nu = self.scale, self.df
        z = t / a
        return -a * (nu + z**2) / (nu - 1) * stats.t.pdf(z, nu)

    def sample(self, rng: np.random.Generator, size) -> NDArray[np.float64]:
        if self.kind == "normal":
            return self.sd * rng.standard_normal(size)
        return self.scale * rng.standard_t(self.df, size)


def partial_mean_by_quadrature(model: ErrorModel, t: float) -> float:
    """Quadrature fallback for ``E[eps 1(eps <= t)]``."""
    val, err = integrate.quad(lambda u: u * model.pdf(u), -np.inf, t, epsabs=1e-13, limit=200)
    if err > 1e-8:
        raise IntegrationError(f"partial mean quadrature error {err:.2g}")
    return val


def asymptotic_covariance(model: ErrorModel, u: ArrayLike, v: ArrayLike):
    """Covariance of the limiting Gaussian process of ``sqrt(2n+1)(F_hat - F)``.

    ``F(min(u,v)) - F(u)F(v) + f(u) m(v) + f(v) m(u) + sigma^2 f(u) f(v)``
    with ``m(t) = E[eps 1(eps <= t)]``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    Fu, Fv = model.cdf(u), model.cdf(v)
    fu, fv = model.pdf(u), model.pdf(v)
    out = (
        model.cdf(np.minimum(u, v))
        - Fu * Fv
        + fu * model.partial_mean(v)
        + fv * model.partial_mean(u)
        + model.variance * fu * fv
    )
    return float(out) if out.ndim == 0 else out


def asymptotic_aimse(model: ErrorModel) -> float:
    """``int Sigma(t, t) dt`` over the real line by adaptive quadrature."""
    integrand = lambda t: asymptotic_covariance(model, t, t)  # noqa: E731
    total = 0.0
    for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)):
        val, err = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=400)
        if err > 1e-8:
            raise IntegrationError(f"AIMSE quadrature error {err:.2g}")
        total += val
    return total
