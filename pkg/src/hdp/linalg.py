"""Dense linear algebra primitives.

Symmetric eigendecomposition (LAPACK or an in-repo cyclic Jacobi solver),
SVD, operator/Frobenius norms, stable rank, rank-r truncation, spectral
matrix functions and the positive-semidefinite order.

All routines take and return plain ``numpy`` arrays.
"""

from __future__ import annotations

import enum
from typing import Callable, NamedTuple

import numpy as np

TOL_EIG = 1e-9


class LinAlgConvergenceError(np.linalg.LinAlgError):
    """Raised when the Jacobi solver exhausts its sweep budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SVDResult(NamedTuple):
    U: np.ndarray
    singular_values: np.ndarray
    Vt: np.ndarray


class PSDOrder(enum.Enum):
    GEQ = "A >= B"
    LEQ = "B >= A"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def sym(X) -> np.ndarray:
    """Return ``X`` as a float symmetric matrix, averaging with its transpose."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {X.shape}")
    return (X + X.T) / 2


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _round_robin(n: int):
    """Yield n-1 (or n) rounds of disjoint index pairs covering all pairs once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p >= 0 and q >= 0]
        if pairs:
            P, Q = np.array(pairs).T
            yield P, Q
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigh(X, tol: float = 1e-14, max_sweeps: int = 60) -> Spectrum:
    """Cyclic Jacobi eigensolver with round-robin (parallel) ordering.

    Each round rotates n/2 disjoint index pairs at once, so a sweep costs
    O(n^3) vectorized work. Converges when the off-diagonal Frobenius mass
    falls below ``tol * ||X||_F``.
    """
    A = sym(_as_matrix(X)).copy()
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return _sorted_spectrum(np.diag(A).copy(), V)

    mask = ~np.eye(n, dtype=bool)

    def off(M):
        return float(np.linalg.norm(M[mask]))

    for _ in range(max_sweeps):
        if off(A) <= tol * scale:
            return _sorted_spectrum(np.diag(A).copy(), V)
        for P, Q in _round_robin(n):
            apq = A[P, Q]
            app = A[P, P]
            aqq = A[Q, Q]
            active = np.abs(apq) > 0.0
            with np.errstate(over="ignore"):
                theta = np.where(active, (aqq - app) / np.where(active, 2 * apq, 1.0), 0.0)
                # 1/(2 theta) branch avoids overflow of theta**2 for huge theta
                big = np.abs(theta) > 1e150
                t = np.where(
                    big,
                    0.5 / np.where(big, theta, 1.0),
                    np.sign(theta) / (np.abs(theta) + np.sqrt(np.where(big, 0.0, theta) ** 2 + 1.0)),
                )
            t = np.where(active, t, 0.0)
            t = np.where(active & (theta == 0.0), 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # columns, then rows: A <- J^T A J
            AP, AQ = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = c * AP - s * AQ
            A[:, Q] = s * AP + c * AQ
            AP, AQ = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * AP - s[:, None] * AQ
            A[Q, :] = s[:, None] * AP + c[:, None] * AQ
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            VP, VQ = V[:, P].copy(), V[:, Q].copy()
            V[:, P] = c * VP - s * VQ
            V[:, Q] = s * VP + c * VQ
    residual = off(A)
    if residual <= tol * scale:
        return _sorted_spectrum(np.diag(A).copy(), V)
    raise LinAlgConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal mass {residual:.3e})",
        residual,
    )


def _sorted_spectrum(w: np.ndarray, V: np.ndarray) -> Spectrum:
    # stable sort by descending value, ties broken by original index
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], V[:, order])


def sym_eig(X, method: str = "lapack") -> Spectrum:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.

    Parameters
    ----------
    X : array_like, shape (n, n)
        Symmetrized on input.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigh``; ``"jacobi"`` uses
        :func:`jacobi_eigh`.
    """
    X = sym(_as_matrix(X))
    if method == "jacobi":
        return jacobi_eigh(X)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, V = np.linalg.eigh(X)
    return _sorted_spectrum(w, V)


def _fix_signs(U: np.ndarray, Vt: np.ndarray):
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, Vt * signs[:, None]


def svd(A, method: str = "lapack") -> SVDResult:
    """Thin SVD with the largest-magnitude entry of each left vector positive.

    ``method="jacobi"`` goes through the eigendecomposition of ``A^T A``
    (or ``A A^T``, whichever is smaller).
    """
    A = _as_matrix(A)
    m, n = A.shape
    if method == "lapack":
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    elif method == "jacobi":
        if m < n:
            r = svd(A.T, method="jacobi")
            U, s, Vt = r.Vt.T, r.singular_values, r.U.T
        else:
            w, V = jacobi_eigh(A.T @ A)
            s = np.sqrt(np.clip(w, 0.0, None))
            AV = A @ V
            cutoff = TOL_EIG * max(s[0], np.finfo(float).tiny)
            keep = s > cutoff
            U = np.zeros((m, n))
            U[:, keep] = AV[:, keep] / s[keep]
            if not np.all(keep):
                # complete the left basis for (numerically) zero singular values
                Qf, _ = np.linalg.qr(np.hstack([U[:, keep], np.eye(m)]))
                U[:, ~keep] = Qf[:, keep.sum(): keep.sum() + (~keep).sum()]
            Vt = V.T
    else:
        raise ValueError(f"unknown method {method!r}")
    U, Vt = _fix_signs(U, Vt)
    return SVDResult(U, s, Vt)


def operator_norm(A) -> float:
    """Largest singular value (max |eigenvalue| for symmetric input)."""
    A = _as_matrix(A)
    if A.shape[0] == A.shape[1] and np.array_equal(A, A.T):
        return float(np.max(np.abs(np.linalg.eigvalsh(A))))
    return float(np.linalg.svd(A, compute_uv=False)[0])


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(_as_matrix(A)))


def stable_rank(A) -> float:
    """``||A||_F^2 / ||A||^2``; lies in ``[1, rank(A)]``."""
    A = _as_matrix(A)
    op = operator_norm(A)
    if op == 0.0:
        raise ValueError("undefined stable rank: zero matrix")
    return frobenius_norm(A) ** 2 / op**2


def truncate_rank(A, r: int, method: str = "lapack") -> np.ndarray:
    """Best rank-``r`` approximation ``sum_{i<r} s_i u_i v_i^T``.

    Ties at the cut keep the first ``r`` values in sorted order.
    """
    A = _as_matrix(A)
    if not 1 <= r <= min(A.shape):
        raise ValueError(f"rank {r} out of range [1, {min(A.shape)}]")
    U, s, Vt = svd(A, method=method)
    return (U[:, :r] * s[:r]) @ Vt[:r]


def matrix_function(X, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function spectrally: ``sum f(lambda_i) u_i u_i^T``."""
    w, V = sym_eig(X)
    with np.errstate(all="raise"):
        try:
            fw = np.asarray(f(w), dtype=float)
        except FloatingPointError as exc:
            raise ValueError(f"function undefined on the spectrum: {exc}") from exc
    if fw.shape != w.shape or not np.all(np.isfinite(fw)):
        raise ValueError("function undefined on the spectrum")
    return sym((V * fw) @ V.T)


def psd_order(A, B) -> PSDOrder:
    """Classify ``A - B`` in the Loewner order.

    Eigenvalues of magnitude below ``1e-9 * (1 + ||A - B||_F)`` count as zero.
    """
    A, B = sym(A), sym(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    D = A - B
    tol = TOL_EIG * (1.0 + np.linalg.norm(D))
    w = np.linalg.eigvalsh(D)
    pos, neg = np.any(w > tol), np.any(w < -tol)
    if pos and neg:
        return PSDOrder.INCOMPARABLE
    if pos:
        return PSDOrder.GEQ
    if neg:
        return PSDOrder.LEQ
    return PSDOrder.EQUAL
