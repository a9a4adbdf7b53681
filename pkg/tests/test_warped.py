"""Warped-structure detection and the existence / non-existence checks."""

import numpy as np
import pytest

from parageo.errors import NonBlockMetric
from parageo.parastructure import slant_analyze
from parageo.scalarfield import parse
from parageo.scenes import corpus_scene
from parageo.submanifold import coordinate_field, frame_at, induced_connection
from parageo.warped import (
    characterization_test,
    detect_warped,
    measured_dlnf,
    nonexistence_obstruction,
    triviality_test,
    verify_warped_connection,
)


@pytest.fixture(scope="module")
def golden_split(golden):
    return detect_warped(
        golden.immersion, (1, 3), (2,), f_candidate=parse("x1", 3), tol=1e-9
    )


@pytest.fixture(scope="module")
def product_scene():
    return corpus_scene("tilted-plane-product")


class TestDetect:
    def test_golden_structure(self, golden_split):
        s = golden_split
        assert s.residual_cross <= 1e-12
        assert s.residual_base_dependence <= 1e-12
        assert s.residual_conformal <= 1e-10
        assert s.residual_factor <= 1e-10
        assert s.metric_law_residual <= 1e-10
        assert s.verdict == "Pass"
        assert not s.trivial

    def test_golden_candidate_ratio_constant(self, golden_split):
        # the recovered warp values are proportional to the candidate x1
        assert golden_split.candidate_ratio_spread <= 1e-9
        # and normalized to 1 at the reference point
        assert golden_split.f_values[0] == pytest.approx(1.0, abs=1e-12)

    def test_product_metric_trivial(self, product_scene):
        s = detect_warped(product_scene.immersion, (1, 3), (2,))
        assert s.trivial
        assert s.max_dlnf <= 1e-12
        assert all(abs(f - 1.0) <= 1e-10 for f in s.f_values)

    def test_wrong_split_rejected(self, golden):
        # declaring the warping variable as fiber makes the base block
        # fiber-dependent
        with pytest.raises(NonBlockMetric):
            detect_warped(golden.immersion, (2, 3), (1,))

    def test_partition_required(self, golden):
        with pytest.raises(ValueError):
            detect_warped(golden.immersion, (2,), (1,))
        with pytest.raises(ValueError):
            detect_warped(golden.immersion, (1, 2, 3), ())

    def test_measured_dlnf_matches_closed_form(self, golden):
        fr = frame_at(golden.immersion, (1.3, 0.6, 0.9))
        mu, conf = measured_dlnf(fr, [0, 2], [1])
        assert conf <= 1e-12
        assert mu[0] == pytest.approx(1.0 / 1.3, abs=1e-12)  # d ln(x1)/dx1
        assert mu[1] == 0.0
        assert abs(mu[2]) <= 1e-12


class TestWarpedConnection:
    def test_golden_identities(self, golden, golden_split):
        rep = verify_warped_connection(golden.immersion, golden_split)
        assert rep.residual_base <= 1e-9
        assert rep.residual_mixed <= 1e-9
        assert rep.residual_fiber <= 1e-9
        assert rep.residual_fiber_umbilical <= 1e-9

    def test_fiber_identity_value(self, golden):
        # nabla_{d2} d2 = -(g22 / x1) grad(x1) = -(x1/2) d1
        for p in ((1.0, 0.0, 1.0), (1.6, 0.8, 1.2)):
            fr = frame_at(golden.immersion, p)
            nab = induced_connection(fr, coordinate_field(3, 2), coordinate_field(3, 2))
            assert np.allclose(nab.coeffs, [-p[0] / 2.0, 0.0, 0.0], atol=1e-12)

    def test_product_identities(self, product_scene):
        split = detect_warped(product_scene.immersion, (1, 3), (2,))
        rep = verify_warped_connection(product_scene.immersion, split)
        assert max(
            rep.residual_base, rep.residual_mixed, rep.residual_fiber
        ) <= 1e-10


class TestCharacterization:
    def test_golden(self, golden, golden_split, golden_frames):
        dbot = golden.distributions["Dperp"]
        dlam = golden.distributions["Dslant"]
        rep = characterization_test(
            golden.immersion, dbot, dlam, golden_split, lam_hat=0.5
        )
        assert rep.scalar_residual <= 1e-9
        assert rep.operator_residual <= 1e-9
        assert rep.xmu_residual <= 1e-12

    def test_trivial_product_reduces(self, product_scene):
        split = detect_warped(product_scene.immersion, (1, 3), (2,))
        rep = characterization_test(
            product_scene.immersion,
            product_scene.distributions["Dperp"],
            product_scene.distributions["Dslant"],
            split,
            lam_hat=0.5,
        )
        # with Z ln f = 0 the identity reduces to A_{PY}tZ = A_{ntZ}Y = 0
        assert rep.operator_residual <= 1e-10
        assert rep.xmu_residual <= 1e-12


class TestTriviality:
    def test_golden_nontrivial_with_measured_sign(self, golden, golden_split):
        rep = triviality_test(
            golden.immersion,
            golden.distributions["Dperp"],
            golden.distributions["Dslant"],
            golden_split,
            lam_hat=0.5,
        )
        assert not rep.vacuous
        assert not rep.trivial
        # both terms equal x1/2 on unit generators up to normalization;
        # the identity holds as a difference, not as the printed sum
        assert rep.max_term_h > 1e-2
        assert rep.max_term_f > 1e-2
        assert rep.empirical_sign == -1
        assert rep.residual_empirical <= 1e-9
        assert rep.residual_printed > 1e-2

    def test_product_is_trivial(self, product_scene):
        split = detect_warped(product_scene.immersion, (1, 3), (2,))
        rep = triviality_test(
            product_scene.immersion,
            product_scene.distributions["Dperp"],
            product_scene.distributions["Dslant"],
            split,
            lam_hat=0.5,
        )
        assert rep.trivial
        assert rep.max_term_h <= 1e-12
        assert rep.max_term_f <= 1e-12

    def test_guard_requires_proper_slant(self, golden, golden_split):
        rep = triviality_test(
            golden.immersion,
            golden.distributions["Dperp"],
            golden.distributions["Dslant"],
            golden_split,
            lam_hat=0.0,
            slant_classification="AntiInvariant",
        )
        assert rep.vacuous


class TestForwardDirection:
    def test_every_detected_slant_base_scene_passes_characterization(self, corpus_reports):
        # scenes whose metric carries the slant-base warped structure must
        # also satisfy the shape-operator characterization
        seen = 0
        for name, report in corpus_reports.items():
            for block in report.get("warped", {}).values():
                if block.get("orientation") != "slant-base":
                    continue
                assert block["detect"]["verdict"] == "Pass", name
                checks = {e["name"]: e for e in block["checks"]}
                op = checks[
                    "characterization operator identity A_{PY}tZ - A_{ntZ}Y = -lam (Z ln f) Y"
                ]
                assert op["residual"] <= 1e-7, name
                seen += 1
        assert seen >= 4  # golden, tilted plane, and both random products

    def test_product_scene_reports_trivial(self, corpus_reports):
        block = corpus_reports["tilted-plane-product"]["warped"]["main"]
        assert block["detect"]["trivial"]
        assert block["triviality"]["trivial"]
        golden = corpus_reports["golden-cone"]["warped"]["main"]
        assert not golden["triviality"]["trivial"]


class TestObstruction:
    def test_forbidden_orientation_flagged(self):
        scene = corpus_scene("forbidden-warp")
        dbot = scene.distributions["Dperp"]
        dlam = scene.distributions["Dslant"]
        slant = slant_analyze(scene.immersion, dlam)
        assert abs(slant.lam_hat - 0.5) < 0.1  # near the unperturbed value
        rep = nonexistence_obstruction(
            scene.immersion, dbot, dlam, (1,), (2, 3),
            lam_hat=slant.lam_hat, slant_classification=slant.classification,
        )
        assert rep.verdict == "WarpingForcedConstant"
        assert rep.max_dlnf > 1e-3
        assert rep.max_lhs > 1e-3
        # the witness: the declared anti-invariant base leaks under t
        assert rep.antiinv_residual > 1e-3

    def test_constant_warp_is_vacuously_consistent(self):
        scene = corpus_scene("forbidden-product")
        dbot = scene.distributions["Dperp"]
        dlam = scene.distributions["Dslant"]
        slant = slant_analyze(scene.immersion, dlam)
        assert slant.classification == "ProperSlant"
        rep = nonexistence_obstruction(
            scene.immersion, dbot, dlam, (1,), (2, 3),
            lam_hat=slant.lam_hat, slant_classification=slant.classification,
        )
        assert rep.verdict == "VacuousConsistent"
        assert rep.max_dlnf <= 1e-10
        assert rep.max_lhs <= 1e-10
        # on the exact product the proof's chain steps hold
        assert rep.chain_residual_warp <= 1e-9
        assert rep.chain_residual_swap <= 1e-9
        assert rep.chain_residual_link <= 1e-9

    def test_anti_invariant_fiber_annihilates(self, golden):
        rep = nonexistence_obstruction(
            golden.immersion,
            golden.distributions["Dslant"],
            golden.distributions["Dperp"],
            (2,),
            (1, 3),
            lam_hat=0.0,
            slant_classification="AntiInvariant",
        )
        assert rep.verdict == "VacuousAntiInvariant"
        assert rep.max_lhs <= 1e-12

    def test_chain_algebra_forces_constant_warp(self):
        # synthetic shape-operator scalars satisfying the three chain steps
        # force 2 lam X(ln f) g(Z,Z) = 0 by pure linear algebra
        rng = np.random.default_rng(53)
        for _ in range(50):
            b = rng.standard_normal()  # g(A_nZ X, tZ)
            c = rng.standard_normal()  # lam X(ln f) g(Z,Z)
            a = b - c  # g(A_nX Z, tZ), forced by the first chain step
            b_prime = b  # g(A_ntZ X, Z), forced by the linking step
            a_prime = b_prime + c  # g(A_nX tZ, Z), forced by the second step
            # h symmetry makes A self-adjoint, i.e. a == a_prime, so the
            # assembled chain leaves exactly 2c on the table
            assert a_prime - a == pytest.approx(2 * c, abs=1e-12)
            # hence a consistent scene (a == a_prime) must have c == 0
