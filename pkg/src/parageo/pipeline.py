"""Analysis pipeline: run the whole verification stack on a scene.

The pipeline evaluates the ambient structure equations, the Gauss-Weingarten
identities over the sample plan, slant classification of every declared
distribution, the pseudo-slant decomposition, the integrability / foliation
criteria against their oracles, and every warped declaration in its declared
orientation.  The result is a plain-dict report (see report.py).
"""

from __future__ import annotations

import numpy as np

from . import __version__
from .ambient import verify_structure
from .distributions import (
    check_decomposition,
    foliation_condition_dbot,
    foliation_condition_dlam,
    integrability_criterion_dbot,
    integrability_criterion_dlam,
    projection,
)
from .errors import GeometryError, SceneError
from .parastructure import (
    domega,
    recomposition_residuals,
    slant_analyze,
    tn_decompose,
    verify_t_identities,
)
from .report import REPORT_VERSION, entry, summarize
from .scalarfield import parse
from .scenes import Scene
from .submanifold import (
    TangentVec,
    VectorField,
    coordinate_field,
    frame_at,
    induced_connection,
    lie_bracket,
    sample_frames,
    second_fundamental_form,
    shape_operator_ambient,
)
from .verdicts import FAIL, INCONCLUSIVE, PASS, VACUOUS, classify_residual
from .warped import (
    characterization_test,
    detect_warped,
    nonexistence_obstruction,
    triviality_test,
    verify_warped_connection,
)

__all__ = ["analyze", "verify_ambient", "check_slant", "check_warped"]


def _base_report(scene: Scene) -> dict:
    plan = scene.immersion.plan
    return {
        "report_version": REPORT_VERSION,
        "tool": {"name": "parageo", "version": __version__},
        "scene": {
            "name": scene.name,
            "parameters": scene.immersion.d,
            "ambient_dim": scene.ambient.dim,
            "grid": plan.grid,
            "random": plan.random,
            "seed": plan.seed,
            "tolerances": {
                "identity": scene.tolerances.identity,
                "classification": scene.tolerances.classification,
                "structural": scene.tolerances.structural,
            },
        },
        "annotations": [],
    }


def _ambient_section(scene: Scene, tol: float) -> dict:
    sr = verify_structure(scene.ambient, tol=tol)
    checks = [
        entry("P*P = I", sr.residual_involution, tol, classify_residual(sr.residual_involution, tol)),
        entry(
            "P^T G P = -G", sr.residual_compat, tol, classify_residual(sr.residual_compat, tol)
        ),
        entry("G symmetric", sr.residual_sym, tol, classify_residual(sr.residual_sym, tol)),
    ]
    return {
        "checks": checks,
        "signature": list(sr.signature),
        "expected_signature": list(sr.expected_signature),
        "verdict": PASS if sr.passed else FAIL,
    }


def _test_fields(d: int) -> tuple[VectorField, VectorField]:
    """Two fixed polynomial fields used for torsion / compatibility spot checks."""
    rot = VectorField(tuple(parse(f"x{(i + 1) % d + 1}", d) for i in range(d)))
    quad = VectorField(
        tuple(parse(f"x{i + 1}*x{(i + 1) % d + 1}", d) for i in range(d))
    )
    return rot, quad


def _frame_identity_suite(scene: Scene, frames, tol: float, structural: float) -> list[dict]:
    """Gauss-Weingarten identity residuals over the sample plan."""
    immersion = scene.immersion
    d = immersion.d
    G = scene.ambient.G
    rot, quad = _test_fields(d)
    rng = np.random.default_rng(99)

    r_recomp_t = r_recomp_n = r_gauss = r_wein = r_hsym = r_torsion = r_compat = 0.0
    r_domega = 0.0
    fd_step = 1e-5
    compat_points = 0

    for _, fr in frames:
        dec = tn_decompose(fr)
        rt, rn = recomposition_residuals(dec)
        r_recomp_t = max(r_recomp_t, rt)
        r_recomp_n = max(r_recomp_n, rn)
        col = np.linalg.norm(fr.T, axis=0)

        # Gauss split: tangential + normal parts recompose the second derivatives
        for i in range(d):
            for j in range(d):
                s = fr.d2[:, i, j]
                a, b = fr.split(s)
                scale = max(1.0, float(np.linalg.norm(s)))
                r_gauss = max(
                    r_gauss,
                    float(np.linalg.norm(fr.tangent_ambient(a) + fr.normal_ambient(b) - s))
                    / scale,
                )

        # Weingarten pairing g(A_zeta X, Y) = gbar(h(X, Y), zeta), two routes
        for aidx in range(fr.N.shape[1]):
            zeta = fr.N[:, aidx]
            zeta = zeta / np.linalg.norm(zeta)
            A = shape_operator_ambient(fr, zeta)
            gA = fr.g @ A
            for i in range(d):
                for j in range(d):
                    hn = fr.normal_ambient(fr.normal_coeffs(fr.d2[:, i, j]))
                    rhs = float(hn @ G @ zeta)
                    r_wein = max(r_wein, abs(gA[i, j] - rhs) / (col[i] * col[j]))

        # h symmetry on random coefficient vectors
        u = TangentVec(fr, rng.standard_normal(d))
        v = TangentVec(fr, rng.standard_normal(d))
        huv = second_fundamental_form(fr, u, v)
        hvu = second_fundamental_form(fr, v, u)
        scale = max(1.0, float(np.linalg.norm(huv.ambient)))
        r_hsym = max(r_hsym, float(np.linalg.norm(huv.ambient - hvu.ambient)) / scale)

        # torsion-freeness on polynomial fields
        nab_rq = induced_connection(fr, rot, quad).coeffs
        nab_qr = induced_connection(fr, quad, rot).coeffs
        br = lie_bracket(fr, rot, quad).coeffs
        scale = max(
            1.0,
            float(np.linalg.norm(fr.T @ rot.values_at(fr.point)))
            * float(np.linalg.norm(fr.T @ quad.values_at(fr.point))),
        )
        r_torsion = max(
            r_torsion, float(np.linalg.norm(fr.T @ (nab_rq - nab_qr - br))) / scale
        )

        # metric compatibility, finite-difference oracle on the left side
        try:
            xv = rot.values_at(fr.point)

            def pairing(pt: np.ndarray) -> float:
                fr2 = frame_at(immersion, pt)
                return float(
                    quad.values_at(pt) @ fr2.g @ coordinate_field(d, 1).values_at(pt)
                )

            lhs = 0.0
            for i in range(d):
                ei = np.zeros(d)
                ei[i] = fd_step
                lhs += xv[i] * (pairing(fr.point + ei) - pairing(fr.point - ei)) / (2 * fd_step)
            e1 = coordinate_field(d, 1)
            rhs = fr.metric_pair(
                induced_connection(fr, rot, quad).coeffs, e1.values_at(fr.point)
            ) + fr.metric_pair(
                quad.values_at(fr.point), induced_connection(fr, rot, e1).coeffs
            )
            r_compat = max(r_compat, abs(lhs - rhs) / max(1.0, abs(lhs)))
            compat_points += 1
        except GeometryError:
            pass

        # closedness of the fundamental 2-form on coordinate triples
        fields = [coordinate_field(d, i + 1) for i in range(d)]
        for i in range(d):
            for j in range(i + 1, d):
                for k in range(j + 1, d):
                    val = domega(fr, fields[i], fields[j], fields[k])
                    r_domega = max(r_domega, abs(val) / (col[i] * col[j] * col[k]))

    entries = [
        entry("P(TX) recomposes through (t, n)", r_recomp_t, tol, classify_residual(r_recomp_t, tol, structural)),
        entry("P(N z) recomposes through (t', n')", r_recomp_n, tol, classify_residual(r_recomp_n, tol, structural)),
        entry("Gauss split recomposes the ambient derivative", r_gauss, tol, classify_residual(r_gauss, tol, structural)),
        entry("Weingarten pairing g(A X, Y) = g(h(X,Y), zeta)", r_wein, tol, classify_residual(r_wein, tol, structural)),
        entry("h symmetry", r_hsym, tol, classify_residual(r_hsym, tol, structural)),
        entry("connection torsion-free", r_torsion, tol, classify_residual(r_torsion, tol, structural)),
    ]
    if compat_points:
        entries.append(
            entry(
                "connection metric-compatible (finite-difference oracle)",
                r_compat,
                tol,
                classify_residual(r_compat, tol, structural),
            )
        )
    if scene.immersion.d >= 3:
        entries.append(
            entry(
                "fundamental 2-form closed (d omega = 0)",
                r_domega,
                tol,
                classify_residual(r_domega, tol, structural),
            )
        )
    return entries


def _slant_dict(sr) -> dict:
    return {
        "classification": sr.classification,
        "lam_hat": sr.lam_hat,
        "per_point_lambda": list(sr.per_point_lambda),
        "spread": sr.spread,
        "deviation": sr.deviation,
        "antisym_residual": sr.antisym_residual,
        "t_norm_max": sr.t_norm_max,
        "n_norm_max": sr.n_norm_max,
        "leak": sr.leak,
        "angle": sr.angle,
        "points_used": sr.points_used,
    }


def _condition_dict(c) -> dict:
    if c.vacuous:
        verdict = VACUOUS
    elif c.agreement is True:
        verdict = PASS
    elif c.agreement is False:
        verdict = FAIL
    else:
        verdict = INCONCLUSIVE
    return {
        "name": c.name,
        "condition_residual": c.condition_residual,
        "oracle_residual": c.oracle_residual,
        "condition_verdict": c.condition_verdict,
        "oracle_verdict": c.oracle_verdict,
        "agreement": c.agreement,
        "identity_residual": c.identity_residual,
        "points_used": c.points_used,
        "verdict": verdict,
    }


def _orientation(scene: Scene, frames, decl) -> str | None:
    """Which factor of the decomposition carries the base variables."""
    if scene.decomposition is None or not frames:
        return None
    dbot = scene.distributions[scene.decomposition[0]]
    dlam = scene.distributions[scene.decomposition[1]]
    fr = frames[0][1]
    in_bot = in_lam = True
    for i in decl.base:
        e = np.zeros(scene.immersion.d)
        e[i - 1] = 1.0
        x = TangentVec(fr, e)
        scale = float(np.linalg.norm(fr.T @ e))
        for dist, flag in ((dbot, "bot"), (dlam, "lam")):
            if dist.rank == 0:
                residual = scale
            else:
                proj = projection(fr, dist, x)
                residual = float(np.linalg.norm(fr.T @ (e - proj.coeffs)))
            if residual > 1e-8 * max(1.0, scale):
                if flag == "bot":
                    in_bot = False
                else:
                    in_lam = False
    if in_lam and not in_bot:
        return "slant-base"
    if in_bot and not in_lam:
        return "anti-base"
    return "mixed"


def _warped_block(scene: Scene, frames, wname: str, decl, report: dict) -> dict:
    tol = scene.tolerances.identity
    structural = scene.tolerances.structural
    immersion = scene.immersion
    block: dict = {"base": list(decl.base), "fiber": list(decl.fiber)}
    orientation = _orientation(scene, frames, decl)
    block["orientation"] = orientation

    split = None
    try:
        split = detect_warped(
            immersion,
            decl.base,
            decl.fiber,
            f_candidate=decl.f_candidate,
            tol=min(tol, 1e-9),
            structural=structural,
        )
    except GeometryError as err:
        verdict = VACUOUS if orientation == "anti-base" else FAIL
        block["detect"] = {"error": str(err), "verdict": verdict}

    if split is not None:
        block["detect"] = {
            "residual_cross": split.residual_cross,
            "residual_base_dependence": split.residual_base_dependence,
            "residual_conformal": split.residual_conformal,
            "residual_factor": split.residual_factor,
            "metric_law_residual": split.metric_law_residual,
            "f_min": min(split.f_values),
            "f_max": max(split.f_values),
            "candidate": split.candidate_source,
            "candidate_ratio_mean": split.candidate_ratio_mean,
            "candidate_ratio_spread": split.candidate_ratio_spread,
            "max_dlnf": split.max_dlnf,
            "trivial": split.trivial,
            "verdict": split.verdict,
        }

    if scene.decomposition is None:
        return block
    dbot = scene.distributions[scene.decomposition[0]]
    dlam = scene.distributions[scene.decomposition[1]]
    if dlam.rank == 0:
        return block
    slant = slant_analyze(immersion, dlam, tol_classify=scene.tolerances.classification, frames=frames)

    if orientation == "slant-base" and split is not None:
        checks = []
        conn = verify_warped_connection(immersion, split)
        for name, res in (
            ("warped connection: base fields stay in the base", conn.residual_base),
            ("warped connection: mixed fields scale by X(ln f)", conn.residual_mixed),
            ("warped connection: fiber fields and grad(ln f)", conn.residual_fiber),
            ("fiber totally umbilical within the submanifold", conn.residual_fiber_umbilical),
        ):
            checks.append(entry(name, res, tol, classify_residual(res, tol, structural)))

        char = characterization_test(immersion, dbot, dlam, split, lam_hat=slant.lam_hat)
        checks.append(
            entry(
                "characterization scalar identity g(A_{PY}tZ, X)",
                char.scalar_residual,
                tol,
                classify_residual(char.scalar_residual, tol, structural),
            )
        )
        checks.append(
            entry(
                "characterization operator identity A_{PY}tZ - A_{ntZ}Y = -lam (Z ln f) Y",
                char.operator_residual,
                tol,
                classify_residual(char.operator_residual, tol, structural),
            )
        )
        checks.append(
            entry(
                "X(ln f) = 0 for anti-invariant X",
                char.xmu_residual,
                tol,
                classify_residual(char.xmu_residual, tol, structural),
            )
        )

        triv = triviality_test(
            immersion,
            dbot,
            dlam,
            split,
            lam_hat=slant.lam_hat,
            slant_classification=slant.classification,
            tol=tol,
        )
        checks.append(
            entry(
                "triviality proof identity (measured relative sign)",
                triv.residual_empirical,
                tol,
                VACUOUS
                if triv.vacuous
                else classify_residual(triv.residual_empirical, tol, structural),
                empirical_sign=triv.empirical_sign,
                residual_printed=triv.residual_printed,
            )
        )
        block["triviality"] = {
            "max_term_h": triv.max_term_h,
            "max_term_f": triv.max_term_f,
            "empirical_sign": triv.empirical_sign,
            "residual_printed": triv.residual_printed,
            "residual_empirical": triv.residual_empirical,
            "trivial": triv.trivial,
            "vacuous": triv.vacuous,
        }
        if not triv.vacuous and triv.empirical_sign == -1 and triv.max_term_h > tol:
            report["annotations"].append(
                {
                    "quantity": "triviality-identity relative sign",
                    "stated": 1.0,
                    "computed": -1.0,
                    "agrees": False,
                    "note": (
                        "the triviality identity is conventionally written as a sum "
                        "lam (Z ln f) g(X,Y) + g(h(X,Y), ntZ) = 0; the data satisfies "
                        "the difference form, which is what the characterization "
                        "identity combined with the shape-operator pairing implies"
                    ),
                }
            )
        block["checks"] = checks
    elif orientation == "anti-base":
        obs = nonexistence_obstruction(
            immersion,
            dbot,
            dlam,
            decl.base,
            decl.fiber,
            lam_hat=slant.lam_hat,
            slant_classification=slant.classification,
            tol=tol,
        )
        if obs.verdict == "WarpingForcedConstant":
            verdict = FAIL
        else:
            verdict = VACUOUS
        block["obstruction"] = {
            "lam_hat": obs.lam_hat,
            "slant_classification": obs.slant_classification,
            "max_dlnf": obs.max_dlnf,
            "max_gzz": obs.max_gzz,
            "max_lhs": obs.max_lhs,
            "chain_residual_warp": obs.chain_residual_warp,
            "chain_residual_swap": obs.chain_residual_swap,
            "chain_residual_link": obs.chain_residual_link,
            "antiinv_residual": obs.antiinv_residual,
            "classification": obs.verdict,
            "message": (
                "warping forced constant (non-existence obstruction)"
                if obs.verdict == "WarpingForcedConstant"
                else "obstruction vacuous: " + obs.verdict
            ),
            "verdict": verdict,
        }
    return block


def analyze(scene: Scene) -> dict:
    """Run the full pipeline and return the report dict."""
    tol = scene.tolerances.identity
    ctol = scene.tolerances.classification
    structural = scene.tolerances.structural
    report = _base_report(scene)
    report["ambient"] = _ambient_section(scene, tol=min(tol, 1e-12))

    frames, skipped = sample_frames(scene.immersion)
    report["sampling"] = {
        "points_used": len(frames),
        "skipped": [{"index": i, "reason": r} for i, r in sorted(skipped)],
    }
    if not frames:
        raise GeometryError("every sample point failed a guard; nothing to analyze")

    ref = frames[0][1]
    report["reference_frame"] = {
        "point": [float(x) for x in ref.point],
        "induced_metric": [[float(v) for v in row] for row in ref.g],
    }

    report["identities"] = _frame_identity_suite(scene, frames, tol, structural)

    report["distributions"] = {}
    for name in sorted(scene.distributions):
        dist = scene.distributions[name]
        if dist.rank == 0:
            continue
        sr = slant_analyze(scene.immersion, dist, tol_classify=ctol, frames=frames)
        report["distributions"][name] = _slant_dict(sr)
        for pv in scene.paper_values:
            if pv.quantity == "slant_coefficient" and pv.distribution == name:
                agrees = abs(sr.lam_hat - pv.stated) <= ctol
                report["annotations"].append(
                    {
                        "quantity": f"slant coefficient of {name}",
                        "stated": pv.stated,
                        "computed": sr.lam_hat,
                        "agrees": agrees,
                        "note": pv.note,
                    }
                )

    report["decomposition"] = None
    report["conditions"] = []
    report["slant_identities"] = []
    if scene.decomposition is not None:
        bot_name, lam_name = scene.decomposition
        dbot, dlam = scene.distributions[bot_name], scene.distributions[lam_name]
        dr = check_decomposition(scene.immersion, dbot, dlam, tol_classify=ctol, frames=frames)
        report["decomposition"] = {
            "anti_invariant": bot_name,
            "slant": lam_name,
            "d1": dr.d1,
            "d2": dr.d2,
            "orth_residual": dr.orth_residual,
            "span_rank_ok": dr.span_rank_ok,
            "antiinv_residual": dr.antiinv_residual,
            "classification": dr.verdict,
            "proper": dr.proper,
            "verdict": FAIL if dr.verdict == "NotPRPseudoSlant" else PASS,
        }

        if dr.slant is not None and dr.d2 > 0:
            ti = verify_t_identities(
                scene.immersion, dlam, lam_hat=dr.slant.lam_hat, frames=frames
            )
            ents = report["slant_identities"]
            for ident in (ti.quadratic_t, ti.quadratic_n):
                ents.append(
                    entry(
                        f"{ident.name} [measured eps = {ident.empirical_sign:+d}]",
                        ident.residual,
                        tol,
                        classify_residual(ident.residual, tol, structural),
                        empirical_sign=ident.empirical_sign,
                        residual_printed=ident.residual_printed,
                    )
                )
                if ident.disagrees_with_printed and not dr.slant.classification == "AntiInvariant":
                    report["annotations"].append(
                        {
                            "quantity": ident.name,
                            "stated": float(ident.printed_sign),
                            "computed": float(ident.empirical_sign),
                            "agrees": False,
                            "note": (
                                "quadratic identity sign measured on the data disagrees "
                                "with the conventionally printed +1"
                            ),
                        }
                    )
            ents.append(
                entry(
                    "t'(nX) = (1 - lambda) X",
                    ti.tprime_residual,
                    tol,
                    classify_residual(ti.tprime_residual, tol, structural),
                )
            )
            ents.append(
                entry(
                    "n'(nX) = -n(tX)",
                    ti.nprime_residual,
                    tol,
                    classify_residual(ti.nprime_residual, tol, structural),
                )
            )

        lam_hat = dr.slant.lam_hat if dr.slant is not None else 0.0
        ctol_agree = 1e-7
        report["conditions"] = [
            _condition_dict(c)
            for c in (
                integrability_criterion_dbot(
                    scene.immersion, dbot, dlam, lam_hat=lam_hat, tol=ctol_agree,
                    structural=structural, frames=frames,
                ),
                integrability_criterion_dlam(
                    scene.immersion, dbot, dlam, tol=ctol_agree, structural=structural,
                    frames=frames,
                ),
                foliation_condition_dbot(
                    scene.immersion, dbot, dlam, tol=ctol_agree, structural=structural,
                    frames=frames,
                ),
                foliation_condition_dlam(
                    scene.immersion, dbot, dlam, tol=ctol_agree, structural=structural,
                    frames=frames,
                ),
            )
        ]

    report["warped"] = {}
    for wname in sorted(scene.warped):
        report["warped"][wname] = _warped_block(scene, frames, wname, scene.warped[wname], report)

    report["summary"] = summarize(report)
    return report


def verify_ambient(scene: Scene) -> dict:
    report = _base_report(scene)
    report["ambient"] = _ambient_section(scene, tol=min(scene.tolerances.identity, 1e-12))
    report["summary"] = summarize(report)
    return report


def check_slant(scene: Scene, dist_name: str) -> dict:
    if dist_name not in scene.distributions:
        raise SceneError(f"scene has no distribution named '{dist_name}'")
    dist = scene.distributions[dist_name]
    if dist.rank == 0:
        raise SceneError(f"distribution '{dist_name}' has no generators")
    report = _base_report(scene)
    frames, skipped = sample_frames(scene.immersion)
    report["sampling"] = {
        "points_used": len(frames),
        "skipped": [{"index": i, "reason": r} for i, r in sorted(skipped)],
    }
    sr = slant_analyze(
        scene.immersion, dist, tol_classify=scene.tolerances.classification, frames=frames
    )
    report["distributions"] = {dist_name: _slant_dict(sr)}
    for pv in scene.paper_values:
        if pv.quantity == "slant_coefficient" and pv.distribution == dist_name:
            report["annotations"].append(
                {
                    "quantity": f"slant coefficient of {dist_name}",
                    "stated": pv.stated,
                    "computed": sr.lam_hat,
                    "agrees": abs(sr.lam_hat - pv.stated) <= scene.tolerances.classification,
                    "note": pv.note,
                }
            )
    report["summary"] = summarize(report)
    return report


def check_warped(scene: Scene, warped_name: str) -> dict:
    if warped_name not in scene.warped:
        raise SceneError(f"scene has no warped declaration named '{warped_name}'")
    report = _base_report(scene)
    frames, skipped = sample_frames(scene.immersion)
    report["sampling"] = {
        "points_used": len(frames),
        "skipped": [{"index": i, "reason": r} for i, r in sorted(skipped)],
    }
    report["warped"] = {
        warped_name: _warped_block(scene, frames, warped_name, scene.warped[warped_name], report)
    }
    report["summary"] = summarize(report)
    return report
