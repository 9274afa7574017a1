"""Basis pursuit and sparse recovery.

``basis_pursuit`` solves ``min ||x||_1  s.t.  A x = y`` as the
nonnegative split ``x = u - v`` with a revised simplex method (Dantzig
pricing, a long-step ratio test, a perturbed first stage against
degeneracy and Bland's rule as anti-cycling fallback), written out here so that every optimal answer is a vertex and
comes with an exact dual certificate.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .ensembles import EnsembleSpec, as_generator, sample_matrix
from .geometry import LpBall, Scaled, SetDescriptor

ORACLE_MAX_N = 14


@dataclass
class BPSolution:
    x_hat: np.ndarray
    objective: float
    residual: float
    iterations: int
    status: str
    dual: np.ndarray | None = None
    nonunique: bool = False

    def to_json(self) -> str:
        rec = {
            "x_hat": [float(v) for v in self.x_hat],
            "objective": float(self.objective),
            "residual": float(self.residual),
            "status": self.status,
        }
        return json.dumps(rec)

    @classmethod
    def from_json(cls, text: str) -> "BPSolution":
        rec = json.loads(text)
        return cls(np.array(rec["x_hat"], dtype=float), rec["objective"], rec["residual"], 0, rec["status"])


@dataclass
class Certificate:
    dual_feasible: bool
    gap: float
    max_abs_ATnu: float

    @property
    def valid(self) -> bool:
        return self.dual_feasible and self.gap <= 1e-6


def tol_feas(y) -> float:
    return 1e-8 * (1.0 + float(np.linalg.norm(y)))


def tol_obj(objective: float) -> float:
    return 1e-6 * (1.0 + objective)


def check_certificate(A, y, sol: BPSolution) -> Certificate:
    """``||A^T nu||_inf <= 1 + 1e-8`` and ``nu^T y >= objective - 1e-6``."""
    if sol.dual is None:
        return Certificate(False, math.inf, math.inf)
    s = float(np.max(np.abs(np.asarray(A).T @ sol.dual)))
    gap = sol.objective - float(sol.dual @ np.asarray(y))
    return Certificate(s <= 1.0 + 1e-8, gap, s)


def _crash_basis(A: np.ndarray):
    """Starting basis columns from a pivoted QR of ``A``."""
    m = A.shape[0]
    _, _, piv = scipy.linalg.qr(A, pivoting=True, mode="economic")
    return np.sort(piv[:m])


def _simplex(A, y, basis, sigma, rule, max_iter, refactor_every, degenerate_limit):
    """Revised simplex on the compact split LP from a given basis and sign vector."""
    m, n = A.shape
    basis = basis.copy()
    in_basis = np.zeros(n, dtype=bool)
    in_basis[basis] = True
    scale = 1.0 + np.abs(A).max()
    dtol = 1e-11 * scale
    ptol = 1e-11 * scale
    # basic values this small count as zero and keep their inherited sign
    ztol = 1e-9 * (1.0 + np.abs(y).max())

    def factor(basis):
        Binv = np.linalg.inv(A[:, basis])
        return Binv, Binv @ y

    def snap(xB, sigma):
        # round-off may leave a basic value a hair on the wrong side of zero
        wrong = sigma * xB < 0
        xB[wrong & (np.abs(xB) <= ztol)] = 0.0
        flip = wrong & (xB != 0)
        sigma[flip] = -sigma[flip]
        return xB, sigma

    Binv, xB = factor(basis)
    xB, sigma = snap(xB, sigma.copy())
    iterations = 0
    stalled = 0
    bland = rule == "bland"
    status = "max_iter"
    while iterations < max_iter:
        nu = Binv.T @ sigma
        g = A.T @ nu
        viol = np.abs(g) - 1.0
        viol[in_basis] = 0.0
        candidates = np.flatnonzero(viol > dtol)
        if candidates.size == 0:
            status = "optimal"
            break
        j = int(candidates[0]) if bland else int(candidates[np.argmax(viol[candidates])])
        s = 1.0 if g[j] > 0 else -1.0  # x_j = s * theta lowers the cost
        slope = -viol[j]
        delta = s * (Binv @ A[:, j])  # x_B(theta) = x_B - theta * delta
        moving = sigma * delta > ptol  # basic values heading toward zero
        idx = np.flatnonzero(moving)
        if idx.size == 0:
            raise RuntimeError("unbounded direction in basis pursuit (cannot happen for ||x||_1)")
        bp = np.maximum(xB[idx] / delta[idx], 0.0)
        if bland:
            bmin = bp.min()
            ties = idx[bp <= bmin + 1e-12 * (1.0 + bmin)]
            r = int(ties[np.argmin(basis[ties])])
            theta, passed = bmin, np.array([], dtype=int)
        else:
            order = np.lexsort((basis[idx], bp))
            r, theta, k = -1, 0.0, 0
            for k in range(order.size):
                slope += 2.0 * abs(delta[idx[order[k]]])
                if slope >= -dtol:
                    r, theta = int(idx[order[k]]), float(bp[order[k]])
                    break
            passed = idx[order[:k]]
        if theta > 0.0:
            stalled = 0
            bland = rule == "bland"
        else:
            stalled += 1
            if stalled >= degenerate_limit:
                bland = True
        xB = xB - theta * delta
        sigma[passed] = -sigma[passed]
        xB[r] = s * theta
        sigma[r] = s
        in_basis[basis[r]] = False
        basis[r] = j
        in_basis[j] = True
        iterations += 1
        if iterations % refactor_every == 0:
            Binv, xB = factor(basis)
        else:
            # product-form update of the inverse
            u = Binv @ A[:, j]
            row = Binv[r] / u[r]
            Binv = Binv - np.outer(u, row)
            Binv[r] = row
        xB, sigma = snap(xB, sigma)
    return basis, sigma, iterations, status


def basis_pursuit(
    A,
    y,
    rule: str = "dantzig",
    max_iter: int = 50_000,
    refactor_every: int = 64,
    degenerate_limit: int = 50,
    perturb: float = 1e-7,
) -> BPSolution:
    """Minimum-l1 solution of ``A x = y`` for a full-row-rank ``A`` with ``m <= n``.

    The split LP ``min 1^T (u + v)  s.t.  A (u - v) = y, u, v >= 0`` is run
    in its compact form: a basis is a set ``S`` of ``m`` columns of ``A``
    plus a sign per basic column (which of ``u_j``, ``v_j`` is basic), so a
    basic variable can change sign without a pivot.

    Sparse solutions make the optimal vertex highly degenerate. The method
    therefore first solves with ``y`` shifted by a fixed pseudo-random
    vector of relative size ``perturb``, which keeps every step strictly
    improving, then restarts from the resulting basis with the true ``y``.
    Reduced costs do not depend on ``y``, so the restart only has to repair
    signs and usually takes a handful of pivots. ``perturb=0`` skips the
    first stage.

    Status is ``"optimal"`` when the residual is within ``1e-8 (1 + ||y||)``,
    the dual vector satisfies ``||A^T nu||_inf <= 1 + 1e-8`` and the duality
    gap is within ``1e-6 (1 + objective)``; ``"max_iter"`` returns the last
    iterate.

    ``rule="bland"`` prices with Bland's lowest-index rule and the textbook
    ratio test throughout. ``rule="dantzig"`` takes the largest reduced-cost
    violation and a long-step ratio test that walks the breakpoints of the
    piecewise-linear objective, flipping the sign of every basic variable it
    passes. After ``degenerate_limit`` consecutive degenerate pivots it
    falls back to the Bland step until the objective strictly decreases;
    Bland's rule cannot cycle and the objective never returns to an earlier
    value, so the method terminates.
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    m, n = A.shape
    if y.size != m:
        raise ValueError(f"y has length {y.size}, expected {m}")
    if m > n:
        raise ValueError("basis pursuit needs m <= n")
    if np.linalg.matrix_rank(A) < m:
        raise ValueError("A is rank deficient; basis pursuit needs full row rank")

    basis = _crash_basis(A)
    sigma = np.ones(m)
    iterations = 0
    args = (rule, max_iter, refactor_every, degenerate_limit)
    if perturb > 0:
        shift = np.random.default_rng(0x5EED).uniform(0.5, 1.0, m) * perturb * (1.0 + np.abs(y).max())
        basis, sigma, iterations, _ = _simplex(A, y + shift, basis, sigma, *args)
    basis, sigma, more, status = _simplex(A, y, basis, sigma, *args)
    iterations += more

    B = A[:, basis]
    xS = np.linalg.solve(B, y)
    nu = np.linalg.solve(B.T, sigma)
    x_hat = np.zeros(n)
    x_hat[basis] = xS
    objective = float(np.abs(x_hat).sum())
    residual = float(np.linalg.norm(A @ x_hat - y))
    sol = BPSolution(x_hat, objective, residual, iterations, status, nu)
    cert = check_certificate(A, y, sol)
    if status == "optimal" and (
        residual > tol_feas(y)
        or not cert.dual_feasible
        or cert.gap > tol_obj(objective)
        or np.any(sigma * xS < -tol_feas(y))
    ):
        status = "max_iter"
        sol.status = status
    # a dual touching +-1 off the support leaves room for other minimizers
    off = np.abs(x_hat) == 0
    sol.nonunique = bool(np.any(np.abs(np.abs(A.T @ nu)[off] - 1.0) <= 1e-9))
    return sol


def lp_oracle_small(A, y) -> BPSolution:
    """Exact l1 minimizer by enumerating every basic feasible solution.

    In the split LP, ``u_j`` and ``v_j`` are never both basic in a
    nondegenerate sense (their columns are parallel), so vertices correspond
    to column subsets ``S`` of ``A`` with ``A_S`` nonsingular and
    ``x_S = A_S^{-1} y``. Only for ``n <= 14``.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    m, n = A.shape
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to n <= {ORACLE_MAX_N}, got {n}")
    x_ls, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ x_ls - y))
    if residual > tol_feas(y):
        return BPSolution(np.full(n, np.nan), math.inf, residual, 0, "infeasible")
    rank = np.linalg.matrix_rank(A)
    if rank < m:
        _, _, piv = scipy.linalg.qr(A.T, pivoting=True, mode="economic")
        rows = np.sort(piv[:rank])
        A, y, m = A[rows], y[rows], rank
    if m == 0:
        return BPSolution(np.zeros(n), 0.0, 0.0, 0, "optimal")
    best, best_obj, count = None, math.inf, 0
    for S in itertools.combinations(range(n), m):
        AS = A[:, S]
        if abs(np.linalg.det(AS)) < 1e-12:
            continue
        xs = np.linalg.solve(AS, y)
        count += 1
        obj = float(np.abs(xs).sum())
        if obj < best_obj - 1e-12:
            best_obj = obj
            best = np.zeros(n)
            best[list(S)] = xs
    res = float(np.linalg.norm(A @ best - y))
    return BPSolution(best, float(np.abs(best).sum()), res, count, "optimal")


def minkowski_recovery(A, y, K: SetDescriptor) -> BPSolution:
    """Minimize ``||x||_K`` over ``A x = y`` for ``K`` a positive multiple of ``B_1^n``.

    ``||x||_K = ||x||_1 / alpha`` so the minimizer is the basis pursuit one.
    """
    inner, alpha = K, 1.0
    while isinstance(inner, Scaled):
        alpha *= inner.alpha
        inner = inner.inner
    if not (isinstance(inner, LpBall) and inner.p == 1):
        raise TypeError("minkowski_recovery supports only scaled l1 balls")
    return basis_pursuit(A, y)


def l0_norm(x, threshold: float = 0.0) -> int:
    """Number of entries with ``|x_i| > threshold`` (exact zeros by default)."""
    return int(np.count_nonzero(np.abs(np.asarray(x)) > threshold))


def sparse_signal(n: int, s: int, rng=None) -> np.ndarray:
    """Unit-norm ``s``-sparse vector with random support and entries ``+-1/sqrt(s)``."""
    x = np.zeros(n)
    if s == 0:
        return x
    gen = as_generator(rng)
    support = gen.choice(n, size=s, replace=False)
    x[support] = gen.choice(np.array([-1.0, 1.0]), size=s) / math.sqrt(s)
    return x


@dataclass
class SparseReport:
    n: int
    s: int
    m: int
    errors: np.ndarray
    exact: np.ndarray
    certified: np.ndarray
    mean_error: float
    theory: float
    l0: list = field(default_factory=list)
    cauchy_schwarz_ok: bool = True

    @property
    def exact_count(self) -> int:
        return int(self.exact.sum())


def sparse_experiment(
    n: int, s: int, m: int, kind: str = "gaussian", trials: int = 50, rng=None, C: float = 1.0, exact_tol: float = 1e-6
) -> SparseReport:
    """Recover random ``s``-sparse unit vectors from ``m`` random measurements."""
    if m >= n:
        warnings.warn(f"m={m} >= n={n}; capping at m = n - 1", stacklevel=2)
        m = n - 1
    if not s <= m:
        raise ValueError("need s <= m")
    gen = as_generator(rng)
    errors, exact, certified, l0s = [], [], [], []
    cs_ok = True
    for _ in range(trials):
        x = sparse_signal(n, s, gen)
        A = sample_matrix(EnsembleSpec(kind, n), m, gen)
        sol = basis_pursuit(A, A @ x)
        err = float(np.linalg.norm(sol.x_hat - x))
        errors.append(err)
        exact.append(err <= exact_tol)
        certified.append(sol.status == "optimal" and check_certificate(A, A @ x, sol).valid)
        l0s.append(l0_norm(x))
        cs_ok &= np.abs(x).sum() <= math.sqrt(max(s, 0)) * np.linalg.norm(x) + 1e-12
    errors = np.array(errors)
    theory = C * math.sqrt(s * math.log(n) / m) if s else 0.0
    return SparseReport(n, s, m, errors, np.array(exact), np.array(certified), float(errors.mean()), theory, l0s, bool(cs_ok))


def write_problem_csv(A, y, a_path, y_path) -> None:
    np.savetxt(a_path, np.asarray(A), delimiter=",", fmt="%.17g")
    np.savetxt(y_path, np.atleast_1d(y), delimiter=",", fmt="%.17g")


def read_problem_csv(a_path, y_path):
    return np.loadtxt(a_path, delimiter=",", ndmin=2), np.loadtxt(y_path, delimiter=",", ndmin=1)
