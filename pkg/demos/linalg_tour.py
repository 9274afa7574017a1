"""Eigendecomposition, SVD and low-rank truncation with the in-house Jacobi solver."""

import numpy as np

from hdp.linalg import operator_norm, stable_rank, svd, sym, sym_eig, truncate_rank

rng = np.random.default_rng(0)
X = sym(rng.standard_normal((8, 8)))

w_lapack, _ = sym_eig(X)
w_jacobi, V = sym_eig(X, method="jacobi")
print("eigenvalues (jacobi):", np.round(w_jacobi, 4))
print("max |jacobi - lapack|:", np.abs(w_jacobi - w_lapack).max())
print("reconstruction error:", np.abs(V @ np.diag(w_jacobi) @ V.T - X).max())

A = rng.standard_normal((20, 6)) @ rng.standard_normal((6, 30))
res = svd(A, method="jacobi")
print("singular values:", np.round(res.singular_values[:8], 4))
print("operator norm", operator_norm(A), "stable rank", stable_rank(A))
for r in (1, 3, 6):
    print(f"rank-{r} truncation error:", np.linalg.norm(A - truncate_rank(A, r), 2))
