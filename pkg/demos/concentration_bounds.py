"""Hoeffding and matrix Bernstein bounds audited against Monte-Carlo tails."""

import math

import numpy as np

from hdp.bounds import (
    BoundParams,
    bound_audit,
    hoeffding_bound,
    matrix_bernstein_bound,
    rademacher_sum_sampler,
    sign_pair_norm_sampler,
    sign_pair_variance,
)
from hdp.ensembles import RngStream

N = 20
params = BoundParams(psi2_norms=[1 / math.sqrt(math.log(2))] * N)
grid = np.linspace(0, 4 * math.sqrt(N), 9)
rep = bound_audit(lambda t: hoeffding_bound(params, t), rademacher_sum_sampler(N), grid, 100_000, RngStream(0))
print("sum of 20 signs")
print("     t    bound   upper99")
for t, b, u in zip(grid, rep.bound_values, rep.tail.upper_conf):
    print(f"{t:6.2f}  {b:7.4f}  {u:8.5f}")
print("dominates everywhere:", rep.passed)

n, N = 10, 50
sigma2 = sign_pair_variance(n, N)
mb = BoundParams(sigma2=sigma2, K=1.0, dim_n=n)
grid = np.linspace(0, 4 * math.sqrt(sigma2), 9)
rep = bound_audit(lambda t: matrix_bernstein_bound(mb, t), sign_pair_norm_sampler(n, N), grid, 10_000, RngStream(1))
print(f"\nnorm of a sum of {N} random sign pairs in dimension {n}, sigma^2 = {sigma2}")
for t, b, u in zip(grid, rep.bound_values, rep.tail.upper_conf):
    print(f"{t:6.2f}  {b:7.4f}  {u:8.5f}")
print("dominates everywhere:", rep.passed)
