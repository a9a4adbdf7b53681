"""Flat ambient spaces (R^2m, P, G) with an almost product structure.

P is a constant involution whose +1/-1 eigenbundles have equal rank and G is
a constant neutral metric with P^T G P = -G.  Because both tensors are
constant, P is parallel for the flat connection and the structure
automatically satisfies the para-Kahler condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import max_abs, signature_counts

__all__ = ["AmbientSpace", "StructureReport", "canonical", "verify_structure"]


@dataclass(frozen=True)
class AmbientSpace:
    """Ambient (R^2m, P, G): product structure P and neutral metric G."""

    m: int
    P: np.ndarray  # (2m, 2m)
    G: np.ndarray  # (2m, 2m)

    @property
    def dim(self) -> int:
        return 2 * self.m

    def _check_vec(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise DimensionMismatch(f"expected vector of length {self.dim}, got {u.shape}")
        return u

    def inner(self, u, v) -> float:
        """Ambient pairing u^T G v."""
        return float(self._check_vec(u) @ self.G @ self._check_vec(v))

    def apply_P(self, u) -> np.ndarray:
        """Action of the product structure on an ambient vector."""
        return self.P @ self._check_vec(u)

    def omega(self, u, v) -> float:
        """Fundamental 2-form value g(u, Pv)."""
        return self.inner(u, self.apply_P(v))


@dataclass(frozen=True)
class StructureReport:
    residual_involution: float  # max |P*P - I|
    residual_compat: float  # max |P^T G P + G|
    residual_sym: float  # max |G - G^T|
    signature: tuple[int, int]
    expected_signature: tuple[int, int]
    passed: bool


def canonical(m: int) -> AmbientSpace:
    """Canonical structure: P swaps e_i and e_{i+m}; G = diag(+1 x m, -1 x m)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    eye = np.eye(m)
    P = np.block([[np.zeros((m, m)), eye], [eye, np.zeros((m, m))]])
    G = np.diag(np.concatenate([np.ones(m), -np.ones(m)]))
    return AmbientSpace(m=m, P=P, G=G)


def verify_structure(space: AmbientSpace, tol: float = 1e-12) -> StructureReport:
    """Check P^2 = I, P^T G P = -G, G symmetric, signature (m, m)."""
    P, G = np.asarray(space.P, float), np.asarray(space.G, float)
    n = space.dim
    if P.shape != (n, n) or G.shape != (n, n):
        raise DimensionMismatch(f"P and G must be {n}x{n}")
    r_inv = max_abs(P @ P - np.eye(n))
    r_compat = max_abs(P.T @ G @ P + G)
    r_sym = max_abs(G - G.T)
    pos, neg, zero = signature_counts(G)
    sig = (pos, neg)
    passed = (
        r_inv <= tol
        and r_compat <= tol
        and r_sym <= tol
        and zero == 0
        and sig == (space.m, space.m)
    )
    return StructureReport(
        residual_involution=r_inv,
        residual_compat=r_compat,
        residual_sym=r_sym,
        signature=sig,
        expected_signature=(space.m, space.m),
        passed=passed,
    )
