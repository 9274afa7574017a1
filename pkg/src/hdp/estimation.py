"""Sample covariance estimation in the bounded and sub-gaussian regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import EnsembleSpec, as_generator, sample_matrix
from .linalg import TOL_EIG, matrix_function, operator_norm, sym


@dataclass
class CovarianceModel:
    """``X = Sigma^{1/2} Z`` with ``Z`` drawn from an isotropic ensemble."""

    sigma: np.ndarray
    kind: str = "gaussian"

    def __post_init__(self):
        self.sigma = sym(self.sigma)
        w = np.linalg.eigvalsh(self.sigma)
        if w.min() < -TOL_EIG * (1 + np.linalg.norm(self.sigma)):
            raise ValueError("covariance matrix is not positive semidefinite")
        self.root = matrix_function(self.sigma, lambda x: np.sqrt(np.clip(x, 0.0, None)))

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    @property
    def norm(self) -> float:
        return operator_norm(self.sigma)

    def effective_rank(self) -> float:
        """``tr(Sigma) / ||Sigma||``."""
        op = self.norm
        if op == 0.0:
            raise ValueError("effective rank undefined for Sigma = 0")
        return float(np.trace(self.sigma)) / op

    def sample(self, N: int, rng=None) -> np.ndarray:
        Z = sample_matrix(EnsembleSpec(self.kind, self.n), N, rng)
        return Z @ self.root


def sample_covariance(samples) -> np.ndarray:
    """``(1/N) sum X_i X_i^T`` under the mean-zero convention (no centering)."""
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty sample set")
    return sym(X.T @ X / X.shape[0])


def centered_sample_covariance(samples) -> np.ndarray:
    """Sample covariance after subtracting the sample mean.

    Uses the ``1/N`` normalization, so it is biased by a factor ``(N-1)/N``.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    return sample_covariance(X - X.mean(axis=0))


def estimation_error(model: CovarianceModel, N: int, trials: int, rng=None) -> np.ndarray:
    """Operator-norm errors ``||Sigma_N - Sigma||`` over independent trials."""
    if N < 1 or trials < 5:
        raise ValueError("need N >= 1 and trials >= 5")
    gen = as_generator(rng)
    return np.array([operator_norm(sample_covariance(model.sample(N, gen)) - model.sigma) for _ in range(trials)])


def theory_bound_general(model: CovarianceModel, N: int, C: float = 1.0) -> float:
    """``C ||Sigma|| (sqrt(n log n / N) + n log n / N)`` for bounded distributions."""
    n = model.n
    if n < 2:
        raise ValueError("bound needs n >= 2")
    k = n * math.log(n) / N
    return C * model.norm * (math.sqrt(k) + k)


@dataclass
class SubgaussianBound:
    n_based: float
    r_based: float
    effective_rank: float


def theory_bound_subgaussian(model: CovarianceModel, N: int, C: float = 1.0) -> SubgaussianBound:
    """``C ||Sigma|| (sqrt(k/N) + k/N)`` with ``k = n`` and with ``k = r`` (effective rank)."""
    r = model.effective_rank()
    op = model.norm

    def f(k):
        return C * op * (math.sqrt(k / N) + k / N)

    return SubgaussianBound(f(model.n), f(r), r)


@dataclass
class TruncationReport:
    kept: np.ndarray
    removed_indices: np.ndarray
    threshold: float
    max_norm_before: float
    max_norm_after: float
    covariance_shift: float


def truncate_sample(samples, fraction: float) -> TruncationReport:
    """Drop the ``ceil(fraction N)`` samples of largest Euclidean norm.

    The report records the operator-norm shift of the sample covariance;
    nothing is asserted about it.
    """
    X = np.atleast_2d(np.asarray(samples, dtype=float))
    if not 0 <= fraction < 0.5:
        raise ValueError("fraction must lie in [0, 0.5)")
    N = X.shape[0]
    k = math.ceil(fraction * N - 1e-12)
    norms = np.linalg.norm(X, axis=1)
    order = np.argsort(-norms, kind="stable")
    removed = np.sort(order[:k])
    keep = np.ones(N, dtype=bool)
    keep[removed] = False
    kept = X[keep]
    shift = operator_norm(sample_covariance(kept) - sample_covariance(X)) if kept.size else float("nan")
    return TruncationReport(
        kept=kept,
        removed_indices=removed,
        threshold=float(norms[order[k]]) if k < N else 0.0,
        max_norm_before=float(norms.max()),
        max_norm_after=float(norms[keep].max()) if keep.any() else 0.0,
        covariance_shift=shift,
    )


def is_psd(S, tol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(sym(S)).min() >= -tol)


def read_samples_csv(path) -> np.ndarray:
    """One sample per row, comma separated; ``#`` lines are comments."""
    X = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return X


def write_samples_csv(samples, path) -> None:
    np.savetxt(path, np.atleast_2d(samples), delimiter=",", fmt="%.17g")
