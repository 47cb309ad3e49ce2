"""Fourier-domain smoothing kernels (spectral weights evaluated at h*k)."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputValidationError


@dataclass(frozen=True)
class SmoothingKernelSpec:
    """Spectral weight profile ``Lambda``.

    Built-in kinds
    --------------
    ``paper_sim``
        1 on ``|u| <= flat_radius``, ``(|u|/flat_radius)^-decay_exponent`` up to
        ``hard_cutoff``, 0 beyond.
    ``spectral_cutoff``
        Indicator of ``|u| <= flat_radius``.
    ``custom``
        ``profile(u)`` outside the flat region; the flat region is forced to 1.
    """

    kind: Literal["paper_sim", "spectral_cutoff", "custom"] = "paper_sim"
    flat_radius: float = 7.0
    decay_exponent: float = 6.0
    hard_cutoff: float = math.inf
    profile: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None

    def __post_init__(self):
        if self.kind not in ("paper_sim", "spectral_cutoff", "custom"):
            raise InputValidationError(f"unknown kernel kind {self.kind!r}")
        if self.flat_radius <= 0:
            raise InputValidationError("flat radius must be positive")
        if self.kind == "custom" and self.profile is None:
            raise InputValidationError("custom kernel needs a profile callback")
        if self.kind == "paper_sim" and self.decay_exponent <= 0:
            raise InputValidationError("decay exponent must be positive")

    @classmethod
    def paper_sim(
        cls, flat_radius: float = 7.0, decay_exponent: float = 6.0, hard_cutoff: float = math.inf
    ) -> "SmoothingKernelSpec":
        return cls("paper_sim", flat_radius, decay_exponent, hard_cutoff)

    @classmethod
    def spectral_cutoff(cls, radius: float = 1.0) -> "SmoothingKernelSpec":
        return cls("spectral_cutoff", flat_radius=radius)

    @classmethod
    def custom(cls, profile, flat_radius: float) -> "SmoothingKernelSpec":
        return cls("custom", flat_radius=flat_radius, profile=profile)

    @property
    def flat_radius_M(self) -> float:
        return self.flat_radius

    def with_cutoff(self, hard_cutoff: float) -> "SmoothingKernelSpec":
        return replace(self, hard_cutoff=hard_cutoff)


def lambda_eval(spec: SmoothingKernelSpec, u: ArrayLike) -> float | NDArray[np.float64]:
    """Evaluate the kernel profile at (possibly shrunken, non-integer) ``u``."""
    ua = np.asarray(u, dtype=float)
    a = np.abs(ua)
    M = spec.flat_radius
    flat = a <= M
    if spec.kind == "spectral_cutoff":
        out = flat.astype(float)
    elif spec.kind == "paper_sim":
        with np.errstate(divide="ignore"):
            tail = (np.maximum(a, M) / M) ** (-spec.decay_exponent)
        out = np.where(flat, 1.0, np.where(a <= spec.hard_cutoff, tail, 0.0))
    else:
        out = np.where(flat, 1.0, np.asarray(spec.profile(ua), dtype=float))
        out = np.where(a <= spec.hard_cutoff, out, 0.0)
    return float(out) if ua.ndim == 0 else out


def spectral_weights(spec: SmoothingKernelSpec, h: float, max_freq: int) -> NDArray[np.float64]:
    """``Lambda(h k)`` for ``k = -max_freq..max_freq``; frequencies beyond are dropped."""
    k = np.arange(-max_freq, max_freq + 1)
    return lambda_eval(spec, h * k)


@dataclass(frozen=True)
class AssumptionProfile:
    """Declared smoothness metadata (never estimated from data)."""

    smoothness_s: float
    ill_posedness_b: float
    moment_kappa: float
    holder_gamma: float = 1.0

    def __post_init__(self):
        if self.smoothness_s < 1:
            raise InputValidationError("smoothness s must be at least 1")
        if self.ill_posedness_b <= 0:
            raise InputValidationError("ill-posedness b must be positive")
        if not 0 < self.holder_gamma <= 1:
            raise InputValidationError("Hoelder exponent must lie in (0, 1]")
        need = 2 + 1 / (self.smoothness_s + self.ill_posedness_b)
        if self.moment_kappa <= need:
            raise InputValidationError(f"moment order kappa must exceed {need:.4g}")


@dataclass
class ValidationReport:
    flat_region_ok: bool
    bounded_ok: bool
    moment_finite: bool
    moment_sum: float
    smoothness_window: tuple[float, float] | None = None
    profile_in_window: bool | None = None
    messages: list[str] | None = None

    @property
    def passed(self) -> bool:
        return self.flat_region_ok and self.bounded_ok and self.moment_finite

    def __str__(self) -> str:
        flag = lambda ok: "ok" if ok else "FAILED"  # noqa: E731
        lines = [
            f"flat region    {flag(self.flat_region_ok)}",
            f"bounded by 1   {flag(self.bounded_ok)}",
            f"b-th moment    {flag(self.moment_finite)} (sum {self.moment_sum:.6g})",
        ]
        if self.smoothness_window is not None:
            lo, hi = self.smoothness_window
            lines.append(f"admissible s   ({lo:g}, {hi:g})")
        if self.profile_in_window is not None:
            lines.append(f"profile s      {'inside' if self.profile_in_window else 'OUTSIDE'} window")
        return "\n".join(lines)


def smoothness_window(spec: SmoothingKernelSpec, b: float) -> tuple[float, float] | None:
    """Range of smoothness indices ``s`` the kernel supports for ill-posedness ``b``.

    The lower end is ``max((2b+1)/2, 3/2)``; the upper end needs
    ``int |u|^(s+b-1/2) |Lambda(u)| du < inf``, i.e. ``s < decay - b - 1/2``.
    Compactly supported kernels have no upper end.
    """
    lo = max((2 * b + 1) / 2, 1.5)
    if spec.kind == "paper_sim" and math.isinf(spec.hard_cutoff):
        return lo, spec.decay_exponent - b - 0.5
    if spec.kind == "spectral_cutoff" or not math.isinf(spec.hard_cutoff):
        return lo, math.inf
    return None


def validate_assumption(
    spec: SmoothingKernelSpec,
    b: float,
    working_range: int,
    profile: AssumptionProfile | None = None,
    tail_tol: float = 0.05,
) -> ValidationReport:
    """Check the flat region, boundedness and a discrete b-th absolute moment.

    The moment is ``sum_{|k| <= range} |k|^b |Lambda(k)|``. It counts as
    finite when the edge contribution ``range^(b+1) |Lambda(range)|`` is
    below ``tail_tol`` times the sum; a tail decaying no faster than
    ``1/k`` fails this.
    """
    M = spec.flat_radius
    if working_range < M:
        raise InputValidationError("working range must cover the flat region")
    messages = []
    k = np.arange(-working_range, working_range + 1, dtype=float)
    lam = lambda_eval(spec, k)
    inner = np.abs(k) <= M
    flat_ok = bool(np.all(lam[inner] == 1.0))
    fine = np.linspace(-working_range, working_range, 20 * working_range + 1)
    bounded_ok = bool(np.all(np.abs(lambda_eval(spec, fine)) <= 1.0))
    if not flat_ok:
        messages.append("Lambda differs from 1 inside the flat region")
    if not bounded_ok:
        messages.append("|Lambda| exceeds 1")
    moment_sum = float(np.sum(np.abs(k) ** b * np.abs(lam)))
    edge = working_range ** (b + 1) * abs(float(lambda_eval(spec, float(working_range))))
    moment_ok = bool(np.isfinite(moment_sum) and edge <= tail_tol * moment_sum)
    if not moment_ok:
        messages.append("b-th absolute moment does not appear summable")
    window = smoothness_window(spec, b)
    in_window = None
    if profile is not None and window is not None:
        in_window = window[0] < profile.smoothness_s < window[1]
        if not in_window:
            messages.append(f"declared s={profile.smoothness_s} lies outside {window}")
    return ValidationReport(flat_ok, bounded_ok, moment_ok, moment_sum, window, in_window, messages)
