"""Property-based checks of the structural invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import direct_coefficients, make_sample, random_hermitian
from deconvreg import (
    DegenerateDistributionError,
    DistortionSpec,
    Ecdf,
    ErrorModel,
    SmoothErrorDistribution,
    SmoothingKernelSpec,
    SpectralCoefficients,
    apply_convolution,
    asymptotic_covariance,
    center_residuals,
    empirical_fourier_coefficients,
    estimate_theta,
    evaluate_series,
    lambda_eval,
    parseval_l2_distance,
    silverman_cn,
    smooth_cdf,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
responses = st.integers(1, 20).flatmap(lambda n: arrays(np.float64, 2 * n + 1, elements=finite))
small = st.integers(1, 8).flatmap(lambda n: arrays(np.float64, 2 * n + 1, elements=finite))
variants = st.sampled_from(["simulation", "model"])
LAPLACE = DistortionSpec.laplace(0.1)
SIM_KERNEL = SmoothingKernelSpec.paper_sim()


@given(y=responses, variant=variants)
def test_coefficients_hermitian(y, variant):
    r = empirical_fourier_coefficients(make_sample(y, variant))
    scale = 1 + np.max(np.abs(y))
    assert np.max(np.abs(r.values - np.conj(r.values[::-1]))) <= 1e-12 * scale


@given(y=small, variant=variants)
def test_fft_matches_direct_sum(y, variant):
    s = make_sample(y, variant)
    r = empirical_fourier_coefficients(s)
    oracle = direct_coefficients(s.x, y, s.n)
    assert np.allclose(r.values, oracle, rtol=0, atol=1e-12 * (1 + np.max(np.abs(y))))


@given(y=responses)
def test_trigonometric_interpolation(y):
    # with Psi = 1 and all weights 1 the estimate passes through the data
    s = make_sample(y)
    est = estimate_theta(s, SpectralCoefficients.ones(s.n), SmoothingKernelSpec.spectral_cutoff(1.0), 1.0 / (s.n + 0.5))
    assert np.allclose(est(s.x), y, rtol=0, atol=1e-10 * (1 + np.max(np.abs(y))))


@given(seed=st.integers(0, 2**32 - 1), K=st.integers(0, 12))
def test_parseval(seed, K):
    rng = np.random.default_rng(seed)
    a = SpectralCoefficients(random_hermitian(rng, K))
    b = SpectralCoefficients(random_hermitian(rng, K))
    x = -0.5 + np.arange(4 * K + 8) / (4 * K + 8)
    riemann = np.mean((evaluate_series(a, x) - evaluate_series(b, x)) ** 2)
    assert abs(parseval_l2_distance(a, b) - riemann) <= 1e-8 * (1 + riemann)


@given(seed=st.integers(0, 2**32 - 1), K=st.integers(0, 10))
def test_convolution_keeps_hermitian(seed, K):
    rng = np.random.default_rng(seed)
    theta = SpectralCoefficients(random_hermitian(rng, K))
    psi = SpectralCoefficients(random_hermitian(rng, K))
    assert apply_convolution(theta, psi).is_hermitian(1e-12)


@settings(deadline=None)
@given(y=responses, z=responses, a=finite, h=st.floats(0.05, 10.0))
def test_estimator_linear(y, z, a, h):
    if y.size != z.size:
        z = np.resize(z, y.size)
    f = lambda v: estimate_theta(make_sample(v), LAPLACE, SIM_KERNEL, h).coefficients.values  # noqa: E731
    lhs, rhs = f(y + a * z), f(y) + a * f(z)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * (1 + np.max(np.abs(rhs))))


@given(v=arrays(np.float64, st.integers(1, 40), elements=finite), q=st.lists(finite, min_size=1, max_size=20))
def test_ecdf_axioms(v, q):
    F = Ecdf(v)
    q = np.sort(np.asarray(q))
    vals = F(q)
    assert np.all((vals >= 0) & (vals <= 1)) and np.all(np.diff(vals) >= 0)
    assert F(np.max(v)) == 1.0 and F(np.min(v) - 1.0) == 0.0
    # values are multiples of 1/len(v)
    assert np.allclose(vals * v.size, np.round(vals * v.size), rtol=0, atol=1e-9)


@settings(deadline=None)
@given(v=arrays(np.float64, st.integers(2, 30), elements=st.floats(-5, 5)), t=st.lists(st.floats(-20, 20), min_size=2))
def test_smooth_cdf_axioms(v, t):
    e = center_residuals(v)
    if np.ptp(e) == 0:
        e = e + np.linspace(-1, 1, e.size)
    if silverman_cn(e) == 0.0:
        # spread below the floating-point floor: the smooth law must refuse to exist
        with pytest.raises(DegenerateDistributionError):
            SmoothErrorDistribution.from_residuals(e)
        return
    d = SmoothErrorDistribution.from_residuals(e)
    vals = smooth_cdf(d, np.sort(t))
    assert np.all((vals >= 0) & (vals <= 1)) and np.all(np.diff(vals) >= -1e-15)


@given(v=arrays(np.float64, st.integers(1, 50), elements=finite))
def test_centering(v):
    e = center_residuals(v)
    assert abs(e.mean()) <= 1e-12 * (1 + np.max(np.abs(v)))
    assert np.allclose(center_residuals(e), e, atol=1e-12 * (1 + np.max(np.abs(v))))


@settings(deadline=None, max_examples=30)
@given(u=st.floats(-5, 5), v=st.floats(-5, 5), kind=st.sampled_from(["normal", "t"]))
def test_sigma_symmetric(u, v, kind):
    model = ErrorModel.normal() if kind == "normal" else ErrorModel.student_t()
    assert abs(asymptotic_covariance(model, u, v) - asymptotic_covariance(model, v, u)) <= 1e-12


@given(u=st.floats(-50, 50), radius=st.floats(0.1, 20), p=st.floats(1.0, 12.0))
def test_kernel_flat_and_even(u, radius, p):
    spec = SmoothingKernelSpec.paper_sim(radius, p)
    val = lambda_eval(spec, u)
    assert val == lambda_eval(spec, -u)
    assert 0 <= val <= 1
    if abs(u) <= radius:
        assert val == 1.0
