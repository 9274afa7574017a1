"""Seedable sub-gaussian ensembles and empirical Orlicz-norm estimators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

KINDS = ("gaussian", "rademacher", "sphere_sqrt_n", "uniform_cube")

# rungs of the moment-growth ladder used by the equivalence audit
MOMENT_ORDERS = (1, 2, 4, 6, 8)


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream_id) pair naming an independent random stream.

    Streams are values: the same pair always yields the same sequence, and
    distinct ``stream_id`` values give statistically independent streams
    (via ``numpy.random.SeedSequence`` spawn keys).
    """

    seed: int = 0
    stream_id: int = 0
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        """Derived stream for trial ``index``."""
        return RngStream(self.seed, self.stream_id, (*self.path, index))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an RngStream, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise ValueError("ensemble dimension must be >= 1")


def _draw(kind: str, size: tuple[int, int], gen: np.random.Generator) -> np.ndarray:
    m, n = size
    if kind == "gaussian":
        return gen.standard_normal((m, n))
    if kind in ("rademacher", "uniform_cube"):
        return gen.choice(np.array([-1.0, 1.0]), size=(m, n))
    if kind == "sphere_sqrt_n":
        g = gen.standard_normal((m, n))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        # a zero gaussian vector has probability zero; redraw defensively
        while np.any(norms == 0):
            bad = norms[:, 0] == 0
            g[bad] = gen.standard_normal((int(bad.sum()), n))
            norms = np.linalg.norm(g, axis=1, keepdims=True)
        return np.sqrt(n) * g / norms
    raise ValueError(kind)


def sample_vector(spec: EnsembleSpec, rng=None) -> np.ndarray:
    return _draw(spec.kind, (1, spec.n), as_generator(rng))[0]


def sample_matrix(spec: EnsembleSpec, m: int, rng=None) -> np.ndarray:
    """``m x n`` matrix with independent rows drawn from ``spec``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return _draw(spec.kind, (m, spec.n), as_generator(rng))


def isotropy_check(spec: EnsembleSpec, samples: int, rng=None) -> float:
    """Operator-norm distance of the empirical second moment from the identity."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    X = sample_matrix(spec, samples, rng)
    M = X.T @ X / samples
    return float(np.max(np.abs(np.linalg.eigvalsh(M - np.eye(spec.n)))))


def _orlicz(samples, transform, name: str) -> float:
    x = np.abs(np.asarray(samples, dtype=float).ravel())
    if x.size < 100:
        raise ValueError(f"{name} estimate needs at least 100 samples, got {x.size}")
    top = x.max()
    if top == 0.0:
        return 0.0
    u = x / top
    lo, hi = 1e-8, 10.0

    def ok(s):
        with np.errstate(over="ignore"):
            return np.mean(np.exp(transform(u, s))) <= 2.0

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return float(hi * top)


def estimate_psi2(samples) -> float:
    """Empirical sub-gaussian norm: smallest t with mean(exp(x^2/t^2)) <= 2.

    Bisection runs on the data normalized by ``max|x|`` so the estimate is
    scale equivariant.
    """
    return _orlicz(samples, lambda u, s: (u / s) ** 2, "psi2")


def estimate_psi1(samples) -> float:
    """Empirical sub-exponential norm: smallest t with mean(exp(|x|/t)) <= 2."""
    return _orlicz(samples, lambda u, s: u / s, "psi1")


@dataclass
class OrliczEstimate:
    psi2: float
    psi1: float
    moment_params: dict = field(default_factory=dict)
    sample_size: int = 0


def orlicz_estimate(samples) -> OrliczEstimate:
    x = np.asarray(samples, dtype=float).ravel()
    moments = {p: float(np.mean(np.abs(x) ** p) ** (1 / p)) for p in MOMENT_ORDERS}
    return OrliczEstimate(estimate_psi2(x), estimate_psi1(x), moments, x.size)


@dataclass
class EquivalenceReport:
    which: str
    constants: dict
    ratios: dict
    moment_ratios: dict
    moment_drift: bool
    passed: bool


def equivalence_audit(
    samples, which: Literal["subgaussian", "subexponential"] = "subgaussian", band: float = 10.0
) -> EquivalenceReport:
    """Estimate the tail, moment, Orlicz and MGF constants and compare them.

    K1 is the smallest constant making the empirical tail sit under the
    model tail at every sample point; K2 is the worst rung of the moment
    ladder; K3 is the Orlicz norm; K4 (centered data only) is a least-squares
    fit of ``log E exp(lambda X)`` against ``lambda^2``. The audit passes
    when every pairwise ratio lies in ``[1/band, band]``.

    ``moment_drift`` is raised when the normalized moments grow by more than
    10% between p=2 and p=8, i.e. the moments outgrow the assumed rate.
    """
    if which not in ("subgaussian", "subexponential"):
        raise ValueError(which)
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10_000:
        raise ValueError("equivalence audit needs at least 10^4 samples")
    N = x.size
    a = np.sort(np.abs(x))
    tail = (N - np.arange(N)) / N  # P(|X| >= a[i])
    pos = a > 0
    if which == "subgaussian":
        K1 = float(np.max(a[pos] / np.sqrt(np.log(2.0 / tail[pos])))) if pos.any() else 0.0
        rate = np.sqrt(np.array(MOMENT_ORDERS, dtype=float))
        K3 = estimate_psi2(x)
    else:
        K1 = float(np.max(a[pos] / np.log(2.0 / tail[pos]))) if pos.any() else 0.0
        rate = np.array(MOMENT_ORDERS, dtype=float)
        K3 = estimate_psi1(x)
    norms = np.array([np.mean(a**p) ** (1 / p) for p in MOMENT_ORDERS])
    moment_ratios = dict(zip(MOMENT_ORDERS, (norms / rate).tolist()))
    K2 = float(max(moment_ratios.values()))
    constants = {"K1": K1, "K2": K2, "K3": K3}

    stderr = x.std() / np.sqrt(N)
    if K3 > 0 and abs(x.mean()) <= 3 * stderr:
        lam = np.array([0.1, 0.25, 0.5, 1.0]) / K3
        lam = np.concatenate([-lam, lam])
        with np.errstate(over="ignore"):
            logm = np.log(np.mean(np.exp(np.outer(lam, x)), axis=1))
        if which == "subgaussian":
            slope = float(np.sum(logm * lam**2) / np.sum(lam**4))
            constants["K4"] = float(np.sqrt(max(slope, 0.0)))
        else:
            # the sub-exponential MGF bound only covers |lambda| <= 1/K4
            small = np.abs(lam) <= 0.5 / K3
            slope = float(np.sum(logm[small] * lam[small] ** 2) / np.sum(lam[small] ** 4))
            constants["K4"] = float(np.sqrt(max(slope, 0.0)))

    keys = sorted(constants)
    ratios = {}
    for i, ki in enumerate(keys):
        for kj in keys[i + 1:]:
            num, den = constants[ki], constants[kj]
            ratios[f"{ki}/{kj}"] = num / den if den > 0 else (1.0 if num == 0 else np.inf)
    passed = all(1 / band <= r <= band for r in ratios.values())
    drift = moment_ratios[8] > 1.1 * moment_ratios[2]
    return EquivalenceReport(which, constants, ratios, moment_ratios, drift, passed)
