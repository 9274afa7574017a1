"""Erdos-Renyi and two-community stochastic block model graphs, spectral clustering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensembles import as_generator
from .linalg import TOL_EIG, operator_norm, sym_eig

DEFAULT_C_CONC = 3.0


@dataclass(frozen=True)
class SBMParams:
    n: int
    p: float
    q: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 4, got {self.n}")
        if not 0 <= self.q <= self.p <= 1:
            raise ValueError("need 0 <= q <= p <= 1")

    @property
    def a(self) -> float:
        return self.p * self.n

    @property
    def b(self) -> float:
        return self.q * self.n

    @property
    def d(self) -> float:
        """Expected degree ``(p + q) n / 2`` (counting the self-pair)."""
        return (self.p + self.q) * self.n / 2

    def recovery_condition(self) -> float:
        """``(a - b)^2 / (log(n) (a + b))``; recovery needs this to be large."""
        return (self.a - self.b) ** 2 / (math.log(self.n) * (self.a + self.b)) if self.a + self.b > 0 else 0.0


def community_labels(n: int) -> np.ndarray:
    return np.where(np.arange(n) < n // 2, 1, -1)


def _sample_symmetric(P: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    n = P.shape[0]
    iu = np.triu_indices(n, 1)
    A = np.zeros((n, n))
    A[iu] = (gen.random(iu[0].size) < P[iu]).astype(float)
    return A + A.T


def sample_er(n: int, p: float, rng=None) -> np.ndarray:
    """Adjacency matrix of G(n, p): zero diagonal, each pair present w.p. ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return _sample_symmetric(np.full((n, n), float(p)), as_generator(rng))


def edge_probabilities(params: SBMParams, labels=None) -> np.ndarray:
    labels = community_labels(params.n) if labels is None else np.asarray(labels)
    return np.where(np.equal.outer(labels, labels), params.p, params.q)


def sample_sbm(params: SBMParams, rng=None, shuffle: bool = False):
    """Draw G(n, p, q).

    Returns ``(adjacency, labels, permutation)``. Without ``shuffle`` the
    first ``n/2`` vertices form community +1; with it, vertex ``i`` of the
    returned graph is vertex ``permutation[i]`` of the unshuffled one.
    """
    gen = as_generator(rng)
    A = _sample_symmetric(edge_probabilities(params), gen)
    labels = community_labels(params.n)
    perm = np.arange(params.n)
    if shuffle:
        perm = gen.permutation(params.n)
        A = A[np.ix_(perm, perm)]
        labels = labels[perm]
    return A, labels, perm


def expected_adjacency(params: SBMParams, diagonal: bool = False) -> np.ndarray:
    """``E A`` for the unshuffled labeling.

    With ``diagonal=False`` (the default) the diagonal is zero, matching
    graphs without self-loops. ``diagonal=True`` gives the rank-two block
    matrix with ``p`` on the diagonal.
    """
    EA = edge_probabilities(params).astype(float)
    if not diagonal:
        np.fill_diagonal(EA, 0.0)
    return EA


def block_spectrum(params: SBMParams):
    """Nonzero eigenpairs of the rank-two (diagonal-included) ``E A``."""
    n = params.n
    v1 = np.ones(n) / math.sqrt(n)
    v2 = community_labels(n) / math.sqrt(n)
    return ((params.p + params.q) * n / 2, v1), ((params.p - params.q) * n / 2, v2)


def spectral_cluster(A) -> np.ndarray:
    """Signs of the eigenvector of the second-largest (signed) eigenvalue.

    Accepts any real symmetric matrix, so ``E A`` itself can be clustered.
    Zero coefficients are labeled +1. When the top two eigenvalues tie (e.g.
    two equal disjoint cliques) the eigenvector is taken inside their common
    eigenspace, orthogonal to the projection of the all-ones vector.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n < 4:
        raise ValueError("spectral clustering needs n >= 4")
    w, V = sym_eig(A)
    v2 = V[:, 1]
    if w[0] - w[1] <= TOL_EIG * (1.0 + abs(w[0])):
        top = V[:, :2]
        u = top @ (top.T @ np.ones(n))
        if np.linalg.norm(u) > 0:
            c = top.T @ u
            v2 = top @ np.array([-c[1], c[0]])
    return np.where(v2 >= 0, 1, -1)


def misclassification_rate(pred, truth) -> float:
    """Fraction of disagreements, minimized over a global label flip."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    k = int(np.count_nonzero(pred != truth))
    return min(k, pred.size - k) / pred.size


def concentration_scale(params: SBMParams) -> float:
    """``sqrt(d log n) + log n``."""
    L = math.log(params.n)
    return math.sqrt(params.d * L) + L


@dataclass
class ConcentrationReport:
    deviations: np.ndarray
    mean_deviation: float
    bound: float
    ratio: float


def concentration_diagnostic(params: SBMParams, trials: int, rng=None, C: float = DEFAULT_C_CONC) -> ConcentrationReport:
    """Monte-Carlo ``E ||A - E A||`` against ``C (sqrt(d log n) + log n)``."""
    if trials < 10:
        raise ValueError("concentration_diagnostic needs at least 10 trials")
    gen = as_generator(rng)
    EA = expected_adjacency(params)
    devs = np.array([operator_norm(sample_sbm(params, gen)[0] - EA) for _ in range(trials)])
    bound = C * concentration_scale(params)
    mean = float(devs.mean())
    return ConcentrationReport(devs, mean, bound, mean / bound)


def write_edge_list(A, path) -> None:
    """One ``u v`` line per edge (``u < v``, 0-indexed)."""
    A = np.asarray(A)
    u, v = np.nonzero(np.triu(A, 1))
    with open(path, "w") as fh:
        fh.write(f"# n={A.shape[0]}\n")
        for i, j in zip(u, v):
            fh.write(f"{i} {j}\n")


def read_edge_list(path, n: int | None = None) -> np.ndarray:
    """Inverse of :func:`write_edge_list`; ``n`` defaults to the header or max index + 1."""
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if n is None and line[1:].strip().startswith("n="):
                n = int(line[1:].strip()[2:])
            continue
        u, v = (int(tok) for tok in line.split()[:2])
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        edges.append((u, v))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    A = np.zeros((n, n))
    for u, v in edges:
        A[u, v] = A[v, u] = 1.0
    return A
