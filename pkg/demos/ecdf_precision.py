"""Small Monte-Carlo run for the residual ECDF against its asymptotic limit.

Run: python demos/ecdf_precision.py [replications]
"""

import sys

import numpy as np

from deconvreg import ExperimentConfig, asymptotic_aimse, asymptotic_covariance, run_experiment

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 100
cfg = ExperimentConfig(half_sizes=(25, 50, 100), replications=reps, master_seed=7,
                       selection_methods=("bootstrap", "ise_oracle"))
table = run_experiment(cfg)
t = np.array(cfg.t_points)

print("AMSE of sqrt(N)(F_hat - F) at t =", t.tolist())
for m, st in table.methods.items():
    for N, row, aimse in zip(table.sample_sizes(), st.amse, st.aimse):
        print(f"  {m:<11} N={N:<4} {np.round(row, 3).tolist()}  AIMSE {aimse:.3f}")
print(f"  limit            {np.round(asymptotic_covariance(cfg.error_model, t, t), 3).tolist()}"
      f"  AIMSE {asymptotic_aimse(cfg.error_model):.3f}")

print("IMSE of theta_hat")
for m, st in table.methods.items():
    print(f"  {m:<11}", "  ".join(f"{v:.4f}+-{s:.4f}" for v, s in zip(st.imse, st.imse_se)))
