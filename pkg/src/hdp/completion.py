"""Low-rank matrix completion by rank-r truncation of the rescaled observations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .ensembles import as_generator
from .linalg import truncate_rank


def low_rank_generator(n: int, r: int, rng=None, normalize: bool = True) -> np.ndarray:
    """Random ``n x n`` matrix ``sum_{k<r} s_k u_k v_k^T`` of rank ``r``.

    Factors are orthonormalized gaussian columns with weights in ``[1, 2]``;
    with ``normalize`` the result is rescaled so ``max |X_ij| = 1``.
    """
    if not 1 <= r <= n:
        raise ValueError(f"rank {r} out of range [1, {n}]")
    gen = as_generator(rng)
    U, _ = np.linalg.qr(gen.standard_normal((n, r)))
    V, _ = np.linalg.qr(gen.standard_normal((n, r)))
    s = gen.uniform(1.0, 2.0, size=r)
    X = (U * s) @ V.T
    if normalize:
        X /= np.abs(X).max()
    return X


def spike_matrix(n: int) -> np.ndarray:
    """Rank-one matrix with a single nonzero entry.

    Completion from a random mask cannot work here: the one informative
    entry is hidden with probability ``1 - p``.
    """
    X = np.zeros((n, n))
    X[0, 0] = 1.0
    return X


def sample_selectors(n: int, p: float, rng=None) -> np.ndarray:
    """i.i.d. Bernoulli(``p``) 0/1 mask. Warns when ``p n^2 < n log n``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if p * n * n < n * math.log(n):
        warnings.warn(
            f"expected sample count p n^2 = {p * n * n:.1f} is below n log n = {n * math.log(n):.1f}",
            stacklevel=2,
        )
    return (as_generator(rng).random((n, n)) < p).astype(float)


def complete(Y, p: float, r: int) -> np.ndarray:
    """Best rank-``r`` approximation of ``Y / p``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if r < 1:
        raise ValueError("r must be >= 1")
    return truncate_rank(np.asarray(Y, dtype=float) / p, r)


def theory_bound(n: int, r: int, m: float, x_inf: float, C: float = 1.0) -> float:
    """``C log(n) sqrt(r n / m) ||X||_inf``."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    return C * math.log(n) * math.sqrt(r * n / m) * x_inf


@dataclass
class CompletionResult:
    X_hat: np.ndarray
    per_entry_rmse: float
    theory_bound: float
    op_error: float
    rescaled_op_error: float
    frob_error: float


@dataclass
class CompletionInstance:
    X: np.ndarray
    r: int
    m: float

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        n = self.X.shape[0]
        if self.X.shape != (n, n):
            raise ValueError("completion instances are square")
        if np.linalg.matrix_rank(self.X) > self.r:
            raise ValueError(f"ground truth has rank above r={self.r}")
        if not 0 < self.m <= n * n:
            raise ValueError("m must lie in (0, n^2]")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> float:
        return self.m / self.n**2

    @property
    def x_inf(self) -> float:
        return float(np.abs(self.X).max())

    def run(self, rng=None, mask=None, C: float = 1.0) -> CompletionResult:
        delta = sample_selectors(self.n, self.p, rng) if mask is None else np.asarray(mask, dtype=float)
        Y = delta * self.X
        X_hat = complete(Y, self.p, self.r)
        E = X_hat - self.X
        frob = float(np.linalg.norm(E))
        return CompletionResult(
            X_hat=X_hat,
            per_entry_rmse=frob / self.n,
            theory_bound=theory_bound(self.n, self.r, self.m, self.x_inf, C),
            op_error=float(np.linalg.norm(E, 2)),
            rescaled_op_error=float(np.linalg.norm(Y / self.p - self.X, 2)),
            frob_error=frob,
        )


def write_instance_csv(X, mask, matrix_path, mask_path) -> None:
    np.savetxt(matrix_path, np.asarray(X), delimiter=",", fmt="%.17g")
    np.savetxt(mask_path, np.asarray(mask), delimiter=",", fmt="%d")


def read_instance_csv(matrix_path, mask_path):
    X = np.loadtxt(matrix_path, delimiter=",", ndmin=2)
    mask = np.loadtxt(mask_path, delimiter=",", ndmin=2)
    return X, mask
