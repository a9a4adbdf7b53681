"""Dense helpers for small indefinite-metric linear algebra problems."""

from __future__ import annotations

import numpy as np

from .errors import GeometryError


def checked_solve(A: np.ndarray, b: np.ndarray, exc: type[GeometryError], what: str) -> np.ndarray:
    """Solve A x = b, raising ``exc`` when A is numerically singular."""
    A = np.asarray(A, dtype=float)
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    n = A.shape[0]
    det = float(np.linalg.det(A)) if n else 1.0
    if abs(det) < 1e-12 * scale**n:
        raise exc(f"{what} is numerically singular (|det| = {abs(det):.3e})")
    return np.linalg.solve(A, b)


def rref_nullspace(A: np.ndarray, rtol: float = 1e-12) -> tuple[np.ndarray, int]:
    """Nullspace basis of A via row reduction with partial pivoting.

    Returns (basis, rank) where basis has shape (n, n - rank) and carries the
    standard free-variable unit pattern, so the result is deterministic and
    keeps rational entries rational.
    """
    A = np.array(A, dtype=float)
    m, n = A.shape
    tol = rtol * max(1.0, float(np.abs(A).max(initial=0.0)))
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r >= m:
            break
        piv = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[piv, c]) <= tol:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] / A[r, c]
        for i in range(m):
            if i != r and A[i, c] != 0.0:
                A[i] = A[i] - A[i, c] * A[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((n, len(free)))
    for k, fc in enumerate(free):
        basis[fc, k] = 1.0
        for i, pc in enumerate(pivots):
            basis[pc, k] = -A[i, fc]
    return basis, len(pivots)


def matrix_rank(A: np.ndarray, rtol: float = 1e-10) -> int:
    """Rank by singular values relative to the largest one."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def signature_counts(G: np.ndarray, tol: float = 1e-10) -> tuple[int, int, int]:
    """(positive, negative, near-zero) eigenvalue counts of a symmetric matrix."""
    w = np.linalg.eigvalsh(0.5 * (G + G.T))
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    pos = int(np.sum(w > tol * scale))
    neg = int(np.sum(w < -tol * scale))
    return pos, neg, len(w) - pos - neg


def max_abs(A) -> float:
    A = np.asarray(A, dtype=float)
    return float(np.abs(A).max(initial=0.0)) if A.size else 0.0
