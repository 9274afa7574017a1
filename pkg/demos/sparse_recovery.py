"""Basis pursuit recovers sparse vectors from few random measurements."""

import numpy as np

from hdp.ensembles import RngStream
from hdp.recovery import basis_pursuit, check_certificate, lp_oracle_small, sparse_experiment

n, s = 200, 5
for m in (10, 20, 30, 40, 80, 150):
    rep = sparse_experiment(n, s, m, trials=20, rng=RngStream(0).child(m))
    print(f"m={m:4d}  exact recoveries {rep.exact_count:2d}/20  mean error {rep.mean_error:.2e}  certified {int(rep.certified.sum())}/20")

gen = np.random.default_rng(1)
A = gen.standard_normal((4, 9))
y = gen.standard_normal(4)
sol = basis_pursuit(A, y)
print("\nsmall instance: simplex objective", sol.objective, "enumeration", lp_oracle_small(A, y).objective)
print("certificate valid:", check_certificate(A, y, sol).valid)
