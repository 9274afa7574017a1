"""Closed-form concentration bounds and a Monte-Carlo audit harness.

Every evaluator returns a probability bound clipped to ``[0, 1]``. The
absolute constants ``c`` and ``C`` that the theory leaves unspecified are
plain parameters with conservative defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import beta

from .ensembles import as_generator

DEFAULT_C_SMALL = 0.25
DEFAULT_C_EXPECTATION = 2.0
CONFIDENCE = 0.99


@dataclass(frozen=True)
class BoundParams:
    psi2_norms: Sequence[float] = ()
    psi1_norms: Sequence[float] = ()
    sigma2: float = 0.0
    K: float = 0.0
    dim_n: int = 1
    c_const: float = DEFAULT_C_SMALL
    C_const: float = 1.0 / 3.0

    def __post_init__(self):
        if any(v < 0 for v in self.psi2_norms) or any(v < 0 for v in self.psi1_norms):
            raise ValueError("Orlicz norms must be non-negative")
        if self.sigma2 < 0 or self.K < 0:
            raise ValueError("sigma2 and K must be non-negative")
        if self.dim_n < 1:
            raise ValueError("dim_n must be >= 1")
        if self.c_const <= 0 or self.C_const <= 0:
            raise ValueError("absolute constants must be positive")


def _check_t(t: float):
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")


def _clip(v: float) -> float:
    return float(min(1.0, max(0.0, v)))


def hoeffding_bound(params: BoundParams, t: float) -> float:
    """``2 exp(-c t^2 / sum ||X_i||_psi2^2)`` for independent mean-zero sub-gaussians."""
    _check_t(t)
    if len(params.psi2_norms) == 0:
        raise ValueError("hoeffding_bound needs psi2_norms")
    s = float(np.sum(np.square(params.psi2_norms)))
    if s == 0.0:
        return 1.0 if t == 0 else 0.0
    return _clip(2.0 * math.exp(-params.c_const * t * t / s))


def bernstein_bound(params: BoundParams, t: float) -> float:
    """Mixed sub-gaussian/sub-exponential tail for sums of sub-exponentials."""
    _check_t(t)
    if len(params.psi1_norms) == 0:
        raise ValueError("bernstein_bound needs psi1_norms")
    norms = np.asarray(params.psi1_norms, dtype=float)
    s, k = float(np.sum(norms**2)), float(norms.max())
    if k == 0.0:
        return 1.0 if t == 0 else 0.0
    return _clip(2.0 * math.exp(-params.c_const * min(t * t / s, t / k)))


def bernstein_bounded_bound(params: BoundParams, t: float) -> float:
    """Variance-sensitive Bernstein for ``|X_i| <= K``: ``2 exp(-(t^2/2)/(sigma^2 + C K t))``."""
    _check_t(t)
    denom = params.sigma2 + params.C_const * params.K * t
    if denom == 0.0:
        return 1.0 if t == 0 else 0.0
    return _clip(2.0 * math.exp(-(t * t / 2.0) / denom))


def matrix_bernstein_bound(params: BoundParams, t: float) -> float:
    """Tail of ``||sum X_i||`` for independent mean-zero symmetric ``n x n`` matrices."""
    _check_t(t)
    # same operation order as bernstein_bounded_bound so n=1 agrees bit for bit
    denom = params.sigma2 + (1.0 / 3.0) * params.K * t
    if denom == 0.0:
        return 1.0 if t == 0 else 0.0
    return _clip(2.0 * params.dim_n * math.exp(-(t * t / 2.0) / denom))


def matrix_bernstein_expectation(params: BoundParams, C_const: float = DEFAULT_C_EXPECTATION) -> float:
    """``C (sigma sqrt(log n) + K log n)`` bounding ``E ||sum X_i||``.

    ``C_const`` is separate from ``params.C_const`` (the tail-bound constant).
    """
    if params.dim_n < 2:
        raise ValueError("expectation bound needs dim_n >= 2 (log n degenerates)")
    if C_const <= 0:
        raise ValueError("C_const must be positive")
    L = math.log(params.dim_n)
    return C_const * (math.sqrt(params.sigma2 * L) + params.K * L)


FAMILIES = {
    "hoeffding": hoeffding_bound,
    "bernstein": bernstein_bound,
    "bernstein_bounded": bernstein_bounded_bound,
    "matrix_bernstein": matrix_bernstein_bound,
}


@dataclass(frozen=True)
class TailBound:
    family: str
    params: BoundParams

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown bound family {self.family!r}")

    def __call__(self, t: float) -> float:
        return FAMILIES[self.family](self.params, t)

    def with_params(self, **kw) -> "TailBound":
        return TailBound(self.family, replace(self.params, **kw))


def clopper_pearson_upper(k, n, confidence: float = CONFIDENCE):
    """One-sided exact binomial upper confidence limit for ``k`` successes in ``n`` trials."""
    k = np.asarray(k)
    with np.errstate(invalid="ignore"):
        upper = beta.ppf(confidence, k + 1, np.maximum(n - k, 1))
    return np.where(k >= n, 1.0, upper)


@dataclass
class TailEstimate:
    t: np.ndarray
    p_hat: np.ndarray
    upper_conf: np.ndarray
    counts: np.ndarray
    trials: int


def empirical_tail(
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    t_grid,
    trials: int,
    rng=None,
    confidence: float = CONFIDENCE,
) -> TailEstimate:
    """Monte-Carlo estimate of ``P(|Z| >= t)`` on a grid.

    ``sampler(gen, size)`` must return ``size`` independent draws of the
    statistic ``Z``.
    """
    if trials < 100:
        raise ValueError("empirical_tail needs at least 100 trials")
    gen = as_generator(rng)
    z = np.abs(np.asarray(sampler(gen, trials), dtype=float).ravel())
    if z.size != trials:
        raise ValueError(f"sampler returned {z.size} draws, expected {trials}")
    t = np.asarray(t_grid, dtype=float)
    counts = np.array([(z >= ti).sum() for ti in t])
    return TailEstimate(t, counts / trials, clopper_pearson_upper(counts, trials, confidence), counts, trials)


@dataclass
class AuditReport:
    passed: bool
    worst_margin: float
    worst_t: float
    violations: list = field(default_factory=list)
    bound_values: np.ndarray | None = None
    tail: TailEstimate | None = None


def bound_audit(bound: Callable[[float], float], sampler, t_grid, trials: int, rng=None) -> AuditReport:
    """Pass iff ``bound(t)`` dominates the 99% upper confidence tail at every grid point."""
    tail = empirical_tail(sampler, t_grid, trials, rng)
    values = np.array([bound(float(ti)) for ti in tail.t])
    margin = values - tail.upper_conf
    worst = int(np.argmin(margin))
    violations = [float(ti) for ti, mg in zip(tail.t, margin) if mg < 0]
    return AuditReport(not violations, float(margin[worst]), float(tail.t[worst]), violations, values, tail)


def rademacher_sum_sampler(N: int):
    def sample(gen, size):
        # sum of N signs = 2*Binomial(N, 1/2) - N
        return 2.0 * gen.binomial(N, 0.5, size=size) - N

    return sample


def sign_pair_matrices(n: int, N: int, gen: np.random.Generator, size: int) -> np.ndarray:
    """``size`` draws of ``sum_{i<N} eps_i (e_j e_k^T + e_k e_j^T)`` with uniform pairs j != k."""
    S = np.zeros((size, n, n))
    rows = np.repeat(np.arange(size), N)
    j = gen.integers(0, n, size=size * N)
    k = (j + gen.integers(1, n, size=size * N)) % n
    eps = gen.choice(np.array([-1.0, 1.0]), size=size * N)
    np.add.at(S, (rows, j, k), eps)
    np.add.at(S, (rows, k, j), eps)
    return S


def sign_pair_variance(n: int, N: int) -> float:
    """``||sum E X_i^2||`` for the sign-pair ensemble: each ``E X_i^2 = (2/n) I``."""
    return 2.0 * N / n


def sign_pair_norm_sampler(n: int, N: int, chunk: int = 2000):
    def sample(gen, size):
        out = []
        for start in range(0, size, chunk):
            S = sign_pair_matrices(n, N, gen, min(chunk, size - start))
            out.append(np.max(np.abs(np.linalg.eigvalsh(S)), axis=1))
        return np.concatenate(out)

    return sample
