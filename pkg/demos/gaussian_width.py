"""Monte-Carlo Gaussian widths and the matrix deviation inequality."""

import math

import numpy as np

from hdp.ensembles import EnsembleSpec, RngStream, sample_matrix
from hdp.geometry import FiniteSet, LpBall, deviation_statistics, gaussian_complexity_mc, random_unit_vectors

for n in (10, 100, 1000):
    w2 = gaussian_complexity_mc(LpBall(2, n), 20_000, RngStream(0).child(n)).mean
    w1 = gaussian_complexity_mc(LpBall(1, n), 20_000, RngStream(1).child(n)).mean
    print(f"n={n:5d}  gamma(B2)/sqrt(n) {w2 / math.sqrt(n):.3f}  gamma(B1)/sqrt(2 ln n) {w1 / math.sqrt(2 * math.log(n)):.3f}")

n = 100
T = FiniteSet(random_unit_vectors(100, n, RngStream(2)))
gamma = gaussian_complexity_mc(T, 20_000, RngStream(3)).mean
print(f"\n100 random unit vectors in R^{n}: gamma(T) = {gamma:.3f}")
gen = RngStream(4).generator()
for m in (16, 64, 256):
    dev = np.mean([deviation_statistics(sample_matrix(EnsembleSpec("gaussian", n), m, gen), T.points)[0] for _ in range(50)])
    print(f"m={m:4d}  E sup | ||Ax|| - sqrt(m) | = {dev:.3f}")
