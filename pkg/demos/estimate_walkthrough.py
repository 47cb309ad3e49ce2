"""Fit one simulated data set with a fixed and a bootstrap-selected h.

Run: python demos/estimate_walkthrough.py
"""

import numpy as np

from deconvreg import (
    BootstrapConfig,
    ExperimentConfig,
    SelectionGrid,
    estimate_theta,
    generate_sample,
    ise,
    pilot_h,
    residual_ecdf,
    residuals,
    select_g_opt,
)

cfg = ExperimentConfig()  # theta1, normal(2/3) errors, Laplace(0.1) blur
n = 50
rng = np.random.default_rng(1)
sample = generate_sample(cfg, n, rng)
truth = cfg.signal.truth(cfg.k_truth(n))

# pilot fit seeds the bootstrap
pilot = estimate_theta(sample, cfg.distortion, cfg.kernel, pilot_h(n, cfg.pilot_constant))
print(f"N = {sample.grid.size}, pilot h = {pilot.regularization_h:.3f}, pilot ISE = {ise(pilot, truth):.4f}")

sel = select_g_opt(sample, pilot, SelectionGrid.default(n), cfg.kernel, cfg.distortion, BootstrapConfig(), rng)
est = estimate_theta(sample, cfg.distortion, cfg.kernel, sel.g_opt)
print(f"bootstrap g = {sel.g_opt:.3f}, ISE = {ise(est, truth):.4f}")

for h in (0.3, 1.0, 3.0):
    print(f"  fixed h = {h:<4} ISE = {ise(estimate_theta(sample, cfg.distortion, cfg.kernel, h), truth):.4f}")

F = residual_ecdf(residuals(sample, est))
t = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
print("residual ECDF at", t.tolist(), "->", np.round(F(t), 3).tolist())
print("true error CDF      ->", np.round(cfg.error_model.cdf(t), 3).tolist())
