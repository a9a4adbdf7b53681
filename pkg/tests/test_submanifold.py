"""Frames, induced metric, second fundamental form, connection, brackets."""

import numpy as np
import pytest

from conftest import jacobi_residual
from parageo.ambient import canonical
from parageo.errors import DegenerateMetric, DimensionMismatch, RankDeficient
from parageo.scalarfield import parse
from parageo.submanifold import (
    Box,
    Exclusion,
    Immersion,
    SamplePlan,
    TangentVec,
    VectorField,
    coordinate_field,
    frame_at,
    gradient_on_manifold,
    induced_connection,
    lie_bracket,
    sample_frames,
    sample_points,
    second_fundamental_form,
    shape_operator,
    shape_operator_ambient,
)


def _immersion(coord_sources, d, m, lo=0.5, hi=2.0, plan=None):
    return Immersion(
        ambient=canonical(m),
        coords=tuple(parse(src, d) for src in coord_sources),
        domain=Box(lo=(lo,) * d, hi=(hi,) * d),
        plan=plan or SamplePlan(grid=3, random=5, seed=7),
    )


@pytest.fixture(scope="module")
def line():
    return _immersion(["x1", "0", "0", "0", "0", "0"], d=1, m=3)


class TestFrame:
    def test_golden_frame_reference_point(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        T_expected = np.zeros((6, 3))
        T_expected[0, 0] = T_expected[1, 0] = 1.0  # e1 + e2
        T_expected[2, 1] = 1.0  # e3
        T_expected[3, 2] = 1.0  # e4
        assert np.allclose(fr.T, T_expected, atol=1e-15)
        assert np.allclose(fr.g, np.diag([2.0, 1.0, -1.0]), atol=1e-15)
        # normal basis is G-orthogonal to the tangent frame and non-degenerate
        assert fr.N.shape == (6, 3)
        assert np.allclose(fr.T.T @ golden.ambient.G @ fr.N, 0.0, atol=1e-14)
        assert abs(np.linalg.det(fr.gn)) > 0.1

    def test_golden_metric_general_point(self, golden):
        fr = frame_at(golden.immersion, (2.0, np.pi / 4, 1.0))
        assert np.allclose(fr.g, np.diag([2.0, 4.0, -1.0]), atol=1e-14)

    def test_linear_graph(self, line):
        fr = frame_at(line, (1.3,))
        assert np.allclose(fr.g, [[1.0]])
        assert fr.N.shape == (6, 5)

    def test_rank_deficient(self):
        imm = _immersion(["x1*x1", "0", "0", "0", "0", "0"], d=1, m=3, lo=-1.0, hi=1.0)
        with pytest.raises(RankDeficient):
            frame_at(imm, (0.0,))

    def test_degenerate_metric_lightlike(self):
        imm = _immersion(["x1", "0", "0", "x1", "0", "0"], d=1, m=3)
        with pytest.raises(DegenerateMetric):
            frame_at(imm, (1.0,))

    def test_point_length_checked(self, golden):
        with pytest.raises(DimensionMismatch):
            frame_at(golden.immersion, (1.0, 2.0))


class TestSamplePlan:
    def test_grid_plus_random_count(self, golden):
        pts, skipped = sample_points(golden.immersion)
        assert len(pts) == 5**3 + 20
        assert skipped == []
        lo = np.asarray(golden.immersion.domain.lo)
        hi = np.asarray(golden.immersion.domain.hi)
        arr = np.array(pts)
        assert np.all(arr >= lo - 1e-12) and np.all(arr <= hi + 1e-12)

    def test_deterministic(self, golden):
        a, _ = sample_points(golden.immersion)
        b, _ = sample_points(golden.immersion)
        assert np.array_equal(np.array(a), np.array(b))

    def test_exclusions_skipped(self):
        imm = Immersion(
            ambient=canonical(3),
            coords=tuple(parse(s, 2) for s in ["x1", "x2", "0", "0", "0", "0"]),
            domain=Box(lo=(0.0, 0.0), hi=(1.0, 1.0)),
            exclusions=(Exclusion(var=1, value=0.5, margin=0.2),),
            plan=SamplePlan(grid=3, random=0, seed=1),
        )
        pts, skipped = sample_points(imm)
        assert skipped and all("excluded hyperplane" in r for _, r in skipped)
        assert all(abs(p[0] - 0.5) >= 0.2 for p in pts)

    def test_sample_frames_reports_guard_failures(self):
        # metric degenerates where the two columns become lightlike-parallel
        imm = _immersion(["x1", "0", "0", "x1", "0", "0"], d=1, m=3)
        frames, skipped = sample_frames(imm)
        assert frames == []
        assert skipped and all("degenerate" in r.lower() for _, r in skipped)


class TestSecondFundamentalForm:
    def test_ruled_direction_flat(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        e1 = TangentVec(fr, np.array([1.0, 0.0, 0.0]))
        h11 = second_fundamental_form(fr, e1, e1)
        assert np.allclose(h11.ambient, 0.0, atol=1e-15)

    def test_circle_direction_curves(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        e2 = TangentVec(fr, np.array([0.0, 1.0, 0.0]))
        h22 = second_fundamental_form(fr, e2, e2)
        expected = np.array([0.5, -0.5, 0.0, 0.0, 0.0, 0.0])  # (e1 - e2)/2
        assert np.allclose(h22.ambient, expected, atol=1e-14)

    def test_symmetry_random(self, golden):
        rng = np.random.default_rng(17)
        for _ in range(5):
            p = rng.uniform([0.6, 0.2, 0.6], [1.9, 1.3, 1.9])
            fr = frame_at(golden.immersion, p)
            u = TangentVec(fr, rng.standard_normal(3))
            v = TangentVec(fr, rng.standard_normal(3))
            assert np.allclose(
                second_fundamental_form(fr, u, v).ambient,
                second_fundamental_form(fr, v, u).ambient,
                atol=1e-13,
            )

    def test_point_mismatch_rejected(self, golden):
        fr1 = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        fr2 = frame_at(golden.immersion, (1.5, 0.3, 1.0))
        with pytest.raises(DimensionMismatch):
            second_fundamental_form(
                fr1, TangentVec(fr1, np.ones(3)), TangentVec(fr2, np.ones(3))
            )


class TestShapeOperator:
    def test_weingarten_value(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        zeta = np.array([0.5, -0.5, 0.0, 0.0, 0.0, 0.0])
        A = shape_operator_ambient(fr, zeta)
        assert (fr.g @ A)[1, 1] == pytest.approx(0.5, abs=1e-14)

    def test_totally_geodesic_line(self, line):
        fr = frame_at(line, (1.0,))
        zeta = fr.normal_ambient(np.eye(5)[0])
        assert np.allclose(shape_operator_ambient(fr, zeta), 0.0)

    def test_normalvec_form_matches_ambient_form(self, golden):
        from parageo.submanifold import NormalVec

        fr = frame_at(golden.immersion, (1.2, 0.4, 0.8))
        coeffs = np.array([0.3, -1.1, 0.7])
        nv = NormalVec(fr, coeffs)
        assert np.allclose(
            shape_operator(fr, nv), shape_operator_ambient(fr, nv.ambient), atol=1e-14
        )

    def test_metric_times_shape_symmetric(self, golden):
        rng = np.random.default_rng(23)
        for _ in range(5):
            p = rng.uniform([0.6, 0.2, 0.6], [1.9, 1.3, 1.9])
            fr = frame_at(golden.immersion, p)
            zeta = fr.normal_ambient(rng.standard_normal(3))
            gA = fr.g @ shape_operator_ambient(fr, zeta)
            assert np.allclose(gA, gA.T, atol=1e-12)


class TestConnection:
    def test_mixed_cone_derivative(self, golden):
        # nabla_{d1} d2 = (1/x1) d2
        for p in ((1.0, 0.0, 1.0), (1.7, 0.9, 0.6)):
            fr = frame_at(golden.immersion, p)
            nab = induced_connection(fr, coordinate_field(3, 1), coordinate_field(3, 2))
            assert np.allclose(nab.coeffs, [0.0, 1.0 / p[0], 0.0], atol=1e-13)

    def test_constant_fields_on_linear_immersion(self, line):
        fr = frame_at(line, (1.0,))
        f = VectorField((parse("3.5", 1),))
        assert np.allclose(induced_connection(fr, f, f).coeffs, 0.0)

    def test_metric_compatibility_fd(self, golden):
        # X g(Y, Z) = g(nabla_X Y, Z) + g(Y, nabla_X Z), left side by
        # central differences
        d = 3
        X = VectorField(tuple(parse(s, d) for s in ("x2", "x3", "x1")))
        Y = VectorField(tuple(parse(s, d) for s in ("x1*x2", "x2*x3", "x3*x1")))
        Z = coordinate_field(d, 1)
        rng = np.random.default_rng(29)
        h = 1e-5
        for _ in range(4):
            p = rng.uniform([0.6, 0.2, 0.6], [1.9, 1.3, 1.9])
            fr = frame_at(golden.immersion, p)

            def pairing(q):
                frq = frame_at(golden.immersion, q)
                return float(Y.values_at(q) @ frq.g @ Z.values_at(q))

            xv = X.values_at(p)
            lhs = 0.0
            for i in range(d):
                e = np.zeros(d)
                e[i] = h
                lhs += xv[i] * (pairing(p + e) - pairing(p - e)) / (2 * h)
            rhs = fr.metric_pair(
                induced_connection(fr, X, Y).coeffs, Z.values_at(p)
            ) + fr.metric_pair(Y.values_at(p), induced_connection(fr, X, Z).coeffs)
            assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))

    def test_torsion_free(self, golden):
        d = 3
        X = VectorField(tuple(parse(s, d) for s in ("x2", "x3", "x1")))
        Y = VectorField(tuple(parse(s, d) for s in ("x1*x2", "x2*x3", "x3*x1")))
        rng = np.random.default_rng(31)
        for _ in range(4):
            p = rng.uniform([0.6, 0.2, 0.6], [1.9, 1.3, 1.9])
            fr = frame_at(golden.immersion, p)
            resid = (
                induced_connection(fr, X, Y).coeffs
                - induced_connection(fr, Y, X).coeffs
                - lie_bracket(fr, X, Y).coeffs
            )
            assert np.linalg.norm(fr.T @ resid) <= 1e-8


class TestGradient:
    def test_warping_function_gradient(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        grad = gradient_on_manifold(fr, parse("x1", 3))
        assert np.allclose(grad.coeffs, [0.5, 0.0, 0.0], atol=1e-15)

    def test_constant_function(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        assert np.allclose(gradient_on_manifold(fr, parse("4.2", 3)).coeffs, 0.0)

    def test_timelike_direction(self, golden):
        fr = frame_at(golden.immersion, (1.0, 0.0, 1.0))
        grad = gradient_on_manifold(fr, parse("x3", 3))
        assert np.allclose(grad.coeffs, [0.0, 0.0, -1.0], atol=1e-15)


class TestLieBracket:
    def test_coordinate_fields_commute(self, golden):
        fr = frame_at(golden.immersion, (1.3, 0.5, 0.9))
        br = lie_bracket(fr, coordinate_field(3, 1), coordinate_field(3, 2))
        assert np.array_equal(br.coeffs, np.zeros(3))

    def test_coefficient_derivative(self, golden):
        # [x1 d2, d1] = -d2
        fr = frame_at(golden.immersion, (1.3, 0.5, 0.9))
        X = VectorField(tuple(parse(s, 3) for s in ("0", "x1", "0")))
        br = lie_bracket(fr, X, coordinate_field(3, 1))
        assert np.allclose(br.coeffs, [0.0, -1.0, 0.0], atol=1e-15)

    def test_jacobi_identity(self):
        d = 3
        fields = (
            VectorField(tuple(parse(s, d) for s in ("x2", "x3", "x1"))),
            VectorField(tuple(parse(s, d) for s in ("x1*x2", "x2*x3", "x3*x1"))),
            VectorField(tuple(parse(s, d) for s in ("x1^2", "1", "x2"))),
        )
        rng = np.random.default_rng(37)
        for _ in range(5):
            p = rng.uniform(0.5, 1.8, size=d)
            assert jacobi_residual(fields, p) <= 1e-9
