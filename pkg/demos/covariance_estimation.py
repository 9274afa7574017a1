"""Sample covariance error scales like sqrt(r / N) with r the effective rank."""

import math

import numpy as np

from hdp.ensembles import RngStream
from hdp.estimation import CovarianceModel, estimation_error, theory_bound_subgaussian

iso = CovarianceModel(np.eye(20))
print("identity in R^20")
for N in (100, 400, 1600, 6400):
    err = estimation_error(iso, N, 20, RngStream(0).child(N)).mean()
    print(f"N={N:5d}  mean error {err:.4f}  sqrt(N)*error {math.sqrt(N) * err:.3f}")

spiked = CovarianceModel(np.diag([1.0] + [0.01] * 99))
print(f"\nspiked in R^100, effective rank {spiked.effective_rank():.2f}")
for N in (50, 200, 800, 3200):
    err = estimation_error(spiked, N, 20, RngStream(1).child(N)).mean()
    b = theory_bound_subgaussian(spiked, N)
    print(f"N={N:5d}  mean error {err:.4f}  rank-based scale {b.r_based:.4f}  dimension-based {b.n_based:.4f}")
