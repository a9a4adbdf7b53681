"""Ambient structure tests: canonical spaces and the structure equations."""

import numpy as np
import pytest

from parageo.ambient import canonical, verify_structure
from parageo.errors import DimensionMismatch


def _basis(n, i):
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


class TestCanonical:
    def test_m3_swaps(self):
        A = canonical(3)
        assert np.array_equal(A.apply_P(_basis(6, 1)), _basis(6, 4))
        assert np.array_equal(A.apply_P(_basis(6, 5)), _basis(6, 2))
        assert np.array_equal(np.diag(A.G), [1, 1, 1, -1, -1, -1])

    def test_m1_smallest(self):
        A = canonical(1)
        assert np.array_equal(A.P, [[0, 1], [1, 0]])
        assert np.array_equal(A.G, [[1, 0], [0, -1]])

    def test_m2_compatibility_exact(self):
        A = canonical(2)
        assert np.array_equal(A.P.T @ A.G @ A.P + A.G, np.zeros((4, 4)))

    def test_rejects_nonpositive_m(self):
        with pytest.raises(ValueError):
            canonical(0)


class TestVerifyStructure:
    def test_canonical_passes_exactly(self):
        rep = verify_structure(canonical(3), tol=1e-12)
        assert rep.passed
        assert rep.residual_involution == 0.0
        assert rep.residual_compat == 0.0
        assert rep.residual_sym == 0.0
        assert rep.signature == (3, 3)

    def test_identity_structure_fails_compat(self):
        from parageo.ambient import AmbientSpace

        A = AmbientSpace(m=1, P=np.eye(2), G=np.diag([1.0, -1.0]))
        rep = verify_structure(A, tol=1e-12)
        assert not rep.passed
        assert rep.residual_compat > 1.0
        assert rep.residual_involution == 0.0

    def test_orthogonal_conjugation_preserves_structure(self):
        from parageo.ambient import AmbientSpace

        base = canonical(2)
        rng = np.random.default_rng(3)
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        A = AmbientSpace(m=2, P=Q.T @ base.P @ Q, G=Q.T @ base.G @ Q)
        rep = verify_structure(A, tol=1e-12)
        assert rep.passed, rep

    def test_dimension_mismatch(self):
        from parageo.ambient import AmbientSpace

        A = AmbientSpace(m=2, P=np.eye(3), G=np.eye(3))
        with pytest.raises(DimensionMismatch):
            verify_structure(A)


class TestPairing:
    def test_timelike_basis_vector(self):
        A = canonical(3)
        assert A.inner(_basis(6, 4), _basis(6, 4)) == -1.0

    def test_omega_vanishes_on_diagonal(self):
        A = canonical(3)
        u = _basis(6, 1)
        assert A.inner(u, A.apply_P(u)) == 0.0
        rng = np.random.default_rng(8)
        for _ in range(10):
            v = rng.standard_normal(6)
            assert A.omega(v, v) == pytest.approx(0.0, abs=1e-12)

    def test_involution_on_random_vectors(self):
        A = canonical(3)
        rng = np.random.default_rng(9)
        for _ in range(10):
            u = rng.standard_normal(6)
            assert np.allclose(A.apply_P(A.apply_P(u)), u, atol=1e-14)

    def test_anti_isometry(self):
        A = canonical(2)
        rng = np.random.default_rng(10)
        for _ in range(10):
            u, v = rng.standard_normal(4), rng.standard_normal(4)
            assert A.inner(A.apply_P(u), A.apply_P(v)) == pytest.approx(
                -A.inner(u, v), abs=1e-12
            )

    def test_omega_antisymmetric(self):
        A = canonical(3)
        rng = np.random.default_rng(12)
        u, v = rng.standard_normal(6), rng.standard_normal(6)
        assert A.omega(u, v) == pytest.approx(-A.omega(v, u), abs=1e-12)

    def test_vector_length_checked(self):
        A = canonical(2)
        with pytest.raises(DimensionMismatch):
            A.inner(np.ones(3), np.ones(4))
        with pytest.raises(DimensionMismatch):
            A.apply_P(np.ones(5))
