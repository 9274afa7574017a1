"""Johnson-Lindenstrauss random projections and distortion certification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .ensembles import EnsembleSpec, as_generator, sample_matrix

DEFAULT_C_JL = 8.0


@dataclass(frozen=True)
class JLConfig:
    eps: float
    n: int
    num_points: int
    C_jl: float = DEFAULT_C_JL
    kind: str = "gaussian"

    def __post_init__(self):
        # eps = 1 is accepted as an edge case of the dimension formula
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.num_points < 2:
            raise ValueError("need at least two points")
        if self.C_jl <= 0:
            raise ValueError("C_jl must be positive")

    @property
    def ensemble(self) -> EnsembleSpec:
        return EnsembleSpec(self.kind, self.n)


def target_dim(eps: float, num_points: float, C_jl: float = DEFAULT_C_JL) -> int:
    """``ceil(C eps^-2 ln N)``, at least 1. ``num_points`` may be real."""
    m = C_jl * math.log(num_points) / eps**2
    # guard against ceil(1.0000000000000002) from rounding in ln
    return max(1, math.ceil(round(m, 9)))


def choose_target_dim(config: JLConfig) -> int:
    return target_dim(config.eps, config.num_points, config.C_jl)


def projection_matrix(n: int, m: int, kind: str = "gaussian", rng=None) -> np.ndarray:
    """``P = A / sqrt(m)`` with ``A`` an ``m x n`` matrix of isotropic rows."""
    return sample_matrix(EnsembleSpec(kind, n), m, rng) / math.sqrt(m)


def project(points, m: int, kind: str = "gaussian", rng=None, matrix=None) -> np.ndarray:
    """Map the rows of ``points`` (N x n) to ``points @ P.T``.

    ``matrix`` overrides the random ``A`` (it is still divided by sqrt(m)).
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if m < 1:
        raise ValueError("m must be >= 1")
    if matrix is None:
        P = projection_matrix(X.shape[1], m, kind, rng)
    else:
        A = np.asarray(matrix, dtype=float)
        if A.shape != (m, X.shape[1]):
            raise ValueError(f"matrix shape {A.shape} != {(m, X.shape[1])}")
        P = A / math.sqrt(m)
    return X @ P.T


@dataclass
class DistortionReport:
    max_expand: float
    max_contract: float
    pairs_checked: int
    min_ratio: float = field(default=1.0)
    max_ratio: float = field(default=1.0)

    def within(self, eps: float) -> bool:
        return self.max_expand <= eps and self.max_contract <= eps


def distortion_audit(original, embedded) -> DistortionReport:
    """Worst expansion and contraction of pairwise distances.

    ``max_expand = max ratio - 1`` and ``max_contract = 1 - min ratio``; either
    may be negative when all ratios sit on one side of 1.
    """
    X = np.asarray(original, dtype=float)
    Y = np.asarray(embedded, dtype=float)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("original and embedded point counts differ")
    d = pdist(X)
    if np.any(d == 0):
        i, j = np.argwhere(np.triu(squareform(d) == 0, 1))[0]
        raise ValueError(f"duplicate points {i} and {j}")
    ratio = pdist(Y) / d
    lo, hi = float(ratio.min()), float(ratio.max())
    return DistortionReport(hi - 1.0, 1.0 - lo, int(d.size), lo, hi)


def jl_trial(config: JLConfig, m: int | None = None, rng=None, points=None) -> DistortionReport:
    """One JL experiment: gaussian point cloud (unless given), project, audit."""
    gen = as_generator(rng)
    if points is None:
        points = gen.standard_normal((config.num_points, config.n))
    m = choose_target_dim(config) if m is None else m
    return distortion_audit(points, project(points, m, config.kind, gen))


def quadratic_form_statistic(z, m: int, kind: str = "gaussian", rng=None) -> float:
    """``(1/m) sum_i <X_i, z>^2 - 1`` for a unit vector ``z`` and ``m`` isotropic rows."""
    z = np.asarray(z, dtype=float)
    A = sample_matrix(EnsembleSpec(kind, z.size), m, rng)
    return float(np.mean((A @ z) ** 2) - 1.0)
