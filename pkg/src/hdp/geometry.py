"""Gaussian width/complexity, radius, Minkowski functionals, matrix deviation audits.

Sets are small descriptor objects. Each knows its exact support function
``sup_{x in T} <g, x>`` (vectorized over rows of ``g``), which is all the
Monte-Carlo width estimators need.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleSpec, as_generator, estimate_psi2, sample_matrix
from .linalg import matrix_function, operator_norm, sym

DEFAULT_C_DEV = 4.0


def _dual_exponent(p: float) -> float:
    if p == 1:
        return np.inf
    if p == np.inf:
        return 1.0
    return p / (p - 1.0)


class SetDescriptor:
    """Bounded subset of R^n with an exact support function."""

    n: int

    def support(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def radius(self) -> float:
        raise NotImplementedError

    def minkowski(self, x) -> float:
        raise TypeError(f"Minkowski functional not supported for {type(self).__name__}")

    def surface_points(self, count: int, rng=None) -> np.ndarray:
        raise TypeError(
            f"{type(self).__name__} has no discretization; pass a FiniteSet instead"
        )


@dataclass
class FiniteSet(SetDescriptor):
    points: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[0] == 0:
            raise ValueError("finite set must be nonempty")
        self.n = self.points.shape[1]

    def support(self, g):
        return np.max(np.atleast_2d(g) @ self.points.T, axis=1)

    def radius(self):
        return float(np.linalg.norm(self.points, axis=1).max())

    def surface_points(self, count=None, rng=None):
        return self.points


@dataclass
class LpBall(SetDescriptor):
    p: float
    n: int
    rho: float = 1.0

    def __post_init__(self):
        if self.p not in (1, 2, np.inf):
            raise ValueError("supported l_p balls: p in {1, 2, inf}")
        if self.rho <= 0:
            raise ValueError("radius must be positive")

    def support(self, g):
        return self.rho * np.linalg.norm(np.atleast_2d(g), ord=_dual_exponent(self.p), axis=1)

    def radius(self):
        if self.p <= 2:
            return float(self.rho)
        return float(self.rho * math.sqrt(self.n))

    def minkowski(self, x):
        return float(np.linalg.norm(np.asarray(x, dtype=float), ord=self.p) / self.rho)

    def surface_points(self, count, rng=None):
        gen = as_generator(rng)
        g = gen.standard_normal((count, self.n))
        if self.p == 1:
            # l1 sphere: |g| normalized to the simplex with random signs
            e = np.abs(gen.exponential(size=(count, self.n)))
            pts = np.sign(g) * e / e.sum(axis=1, keepdims=True)
            return self.rho * np.vstack([pts, np.eye(self.n), -np.eye(self.n)])
        if self.p == 2:
            return self.rho * g / np.linalg.norm(g, axis=1, keepdims=True)
        return self.rho * np.sign(g)


@dataclass
class Ellipsoid(SetDescriptor):
    """``Sigma^{1/2} B_2^n``; its boundary is the ellipsoid ``Sigma^{1/2} S^{n-1}``."""

    sigma: np.ndarray
    root: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.sigma = sym(self.sigma)
        self.n = self.sigma.shape[0]
        self.root = matrix_function(self.sigma, lambda x: np.sqrt(np.clip(x, 0.0, None)))

    def support(self, g):
        return np.linalg.norm(np.atleast_2d(g) @ self.root, axis=1)

    def radius(self):
        return math.sqrt(operator_norm(self.sigma))

    def minkowski(self, x):
        x = np.asarray(x, dtype=float)
        sol, *_ = np.linalg.lstsq(self.root, x, rcond=None)
        if np.linalg.norm(self.root @ sol - x) > 1e-9 * (1 + np.linalg.norm(x)):
            return math.inf
        return float(np.linalg.norm(sol))

    def surface_points(self, count, rng=None):
        g = as_generator(rng).standard_normal((count, self.n))
        return (g / np.linalg.norm(g, axis=1, keepdims=True)) @ self.root


@dataclass
class Scaled(SetDescriptor):
    inner: SetDescriptor
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("scale must be positive")
        self.n = self.inner.n

    def support(self, g):
        return self.alpha * self.inner.support(g)

    def radius(self):
        return self.alpha * self.inner.radius()

    def minkowski(self, x):
        return self.inner.minkowski(x) / self.alpha

    def surface_points(self, count, rng=None):
        return self.alpha * self.inner.surface_points(count, rng)


@dataclass
class Difference(SetDescriptor):
    """``T - T``."""

    inner: SetDescriptor

    def __post_init__(self):
        self.n = self.inner.n

    def support(self, g):
        g = np.atleast_2d(g)
        return self.inner.support(g) + self.inner.support(-g)

    def radius(self):
        if isinstance(self.inner, FiniteSet):
            P = self.inner.points
            d = P[:, None, :] - P[None, :, :]
            return float(np.linalg.norm(d, axis=2).max())
        # symmetric convex sets: T - T = 2T
        return 2.0 * self.inner.radius()

    def surface_points(self, count, rng=None):
        if isinstance(self.inner, FiniteSet):
            P = self.inner.points
            return (P[:, None, :] - P[None, :, :]).reshape(-1, self.n)
        return 2.0 * self.inner.surface_points(count, rng)


def analytic_sup(T: SetDescriptor, g) -> float | np.ndarray:
    """Exact ``sup_{x in T} <g, x>``; vectorized over rows of a 2-d ``g``."""
    g = np.asarray(g, dtype=float)
    out = T.support(g)
    return float(out[0]) if g.ndim == 1 else out


def radius(T: SetDescriptor) -> float:
    return T.radius()


def minkowski_functional(K: SetDescriptor, x) -> float:
    """``inf {t > 0 : x / t in K}``."""
    if not np.any(np.asarray(x, dtype=float)):
        return 0.0
    return K.minkowski(x)


@dataclass
class WidthEstimate:
    mean: float
    stderr: float
    draws: int


def _mc(values: np.ndarray) -> WidthEstimate:
    return WidthEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size)), values.size)


def _draw_sups(T: SetDescriptor, draws: int, rng, chunk: int = 4096):
    if draws < 100:
        raise ValueError("need at least 100 Monte-Carlo draws")
    gen = as_generator(rng)
    up, down = [], []
    for start in range(0, draws, chunk):
        g = gen.standard_normal((min(chunk, draws - start), T.n))
        up.append(T.support(g))
        down.append(T.support(-g))
    return np.concatenate(up), np.concatenate(down)


def gaussian_width_mc(T: SetDescriptor, draws: int, rng=None) -> WidthEstimate:
    """Monte-Carlo ``E sup_{x in T} <g, x>``."""
    up, _ = _draw_sups(T, draws, rng)
    return _mc(up)


def gaussian_complexity_mc(T: SetDescriptor, draws: int, rng=None) -> WidthEstimate:
    """Monte-Carlo ``E sup_{x in T} |<g, x>|`` (no implicit symmetrization)."""
    up, down = _draw_sups(T, draws, rng)
    return _mc(np.maximum(up, down))


def finite_set_envelope(T: FiniteSet) -> float:
    """Deterministic ``sqrt(2 ln(2|T|)) max ||x||_2`` upper bound on ``gamma(T)``."""
    return math.sqrt(2.0 * math.log(2 * T.points.shape[0])) * T.radius()


@dataclass
class DeviationReport:
    deviations: np.ndarray
    square_deviations: np.ndarray
    mean_deviation: float
    mean_square_deviation: float
    gamma: float
    radius: float
    K: float
    bound: float
    square_bound: float
    discretized: bool

    @property
    def passed(self) -> bool:
        return self.mean_deviation <= self.bound and self.mean_square_deviation <= self.square_bound


def deviation_statistics(A: np.ndarray, points: np.ndarray):
    """``sup_x | ||Ax|| - sqrt(m)||x|| |`` and the squared version over finite ``points``."""
    m = A.shape[0]
    AX = points @ A.T
    ax = np.linalg.norm(AX, axis=1)
    x = np.linalg.norm(points, axis=1)
    return float(np.max(np.abs(ax - math.sqrt(m) * x))), float(np.max(np.abs(ax**2 - m * x**2)))


def deviation_audit(
    T: SetDescriptor,
    kind: str,
    m: int,
    trials: int,
    rng=None,
    C: float = DEFAULT_C_DEV,
    K: float | None = None,
    width_draws: int = 20_000,
    n_disc: int = 2000,
) -> DeviationReport:
    """Monte-Carlo matrix-deviation statistics against ``C K^2 gamma(T)``.

    Finite sets are exact. Infinite sets are replaced by ``n_disc`` random
    boundary points, which can only underestimate the supremum; a warning
    is issued. ``K`` defaults to the empirical psi2 norm of 10^5 ensemble
    coordinates.
    """
    gen = as_generator(rng)
    discretized = not isinstance(T, FiniteSet) and not (
        isinstance(T, Difference) and isinstance(T.inner, FiniteSet)
    )
    if discretized:
        warnings.warn(
            "deviation sup over an infinite set is approximated by random boundary points "
            "and is biased low",
            stacklevel=2,
        )
    points = T.surface_points(n_disc, gen)
    if K is None:
        K = estimate_psi2(sample_matrix(EnsembleSpec(kind, 1), 100_000, gen).ravel())
    gamma = gaussian_complexity_mc(T, width_draws, gen).mean
    rad = T.radius()
    dev = np.empty(trials)
    sq = np.empty(trials)
    for i in range(trials):
        A = sample_matrix(EnsembleSpec(kind, T.n), m, gen)
        dev[i], sq[i] = deviation_statistics(A, points)
    return DeviationReport(
        deviations=dev,
        square_deviations=sq,
        mean_deviation=float(dev.mean()),
        mean_square_deviation=float(sq.mean()),
        gamma=gamma,
        radius=rad,
        K=K,
        bound=C * K**2 * gamma,
        square_bound=C * K**4 * gamma**2 + C * K**2 * math.sqrt(m) * rad * gamma,
        discretized=discretized,
    )


def random_unit_vectors(count: int, n: int, rng=None) -> np.ndarray:
    g = as_generator(rng).standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def read_points_csv(path) -> FiniteSet:
    return FiniteSet(np.loadtxt(path, delimiter=",", comments="#", ndmin=2))
