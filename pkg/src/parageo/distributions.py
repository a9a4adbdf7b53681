"""Pairs of orthogonal tangent distributions: the anti-invariant + slant
decomposition, and the executable content of the integrability /
totally-geodesic-foliation criteria.

Each printed shape-operator criterion is evaluated next to an independent
oracle (Frobenius bracket test, or the connection-stays-in-the-distribution
test), and the report records whether the two verdicts agree.  Conditions are
quantified over the generator sets and the sample plan only; every quantity
involved is tensorial in its slots, so generator verification implies the
full condition pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetric, GeometryError
from .linalg import checked_solve, matrix_rank, max_abs
from .parastructure import (
    SlantReport,
    normalized_generators,
    slant_analyze,
    tn_decompose,
)
from .submanifold import (
    Distribution,
    Immersion,
    PointFrame,
    TangentVec,
    induced_connection,
    lie_bracket,
    sample_frames,
    shape_operator_ambient,
)
from .verdicts import (
    DEFAULT_STRUCTURAL_TOL,
    INCONCLUSIVE,
    PASS,
    VACUOUS,
    classify_residual,
)

__all__ = [
    "DecompReport",
    "BracketReport",
    "ConditionReport",
    "projection",
    "check_decomposition",
    "integrability_test",
    "foliation_test",
    "integrability_criterion_dbot",
    "integrability_criterion_dlam",
    "foliation_condition_dbot",
    "foliation_condition_dlam",
]


def projection(frame: PointFrame, dist: Distribution, X: TangentVec) -> TangentVec:
    """g-orthogonal projection of a tangent vector onto the distribution."""
    W = dist.matrix_at(frame.point)
    if W.shape[1] == 0:
        return TangentVec(frame, np.zeros(frame.d))
    gram = W.T @ frame.g @ W
    c = checked_solve(gram, W.T @ frame.g @ X.coeffs, DegenerateMetric, "distribution metric")
    return TangentVec(frame, W @ c)


def _out_of_span(frame: PointFrame, W: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Component of a tangent coefficient vector g-orthogonal to span(W)."""
    if W.shape[1] == 0:
        return coeffs
    gram = W.T @ frame.g @ W
    c = checked_solve(gram, W.T @ frame.g @ coeffs, DegenerateMetric, "distribution metric")
    return coeffs - W @ c


@dataclass(frozen=True)
class DecompReport:
    d1: int  # rank of the anti-invariant distribution
    d2: int  # rank of the slant distribution
    orth_residual: float
    span_rank_ok: bool
    antiinv_residual: float  # max |tX| over unit generators of D_bot
    slant: SlantReport | None
    verdict: str
    proper: bool
    points_used: int
    skipped: tuple[tuple[int, str], ...]


def check_decomposition(
    immersion: Immersion,
    dbot: Distribution,
    dlam: Distribution,
    *,
    tol_classify: float = 1e-8,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> DecompReport:
    """Verify TM = D_bot (+) D_lam: orthogonality, spanning, anti-invariance
    of D_bot and the slant classification of D_lam."""
    d1, d2 = dbot.rank, dlam.rank
    if d1 + d2 != immersion.d:
        raise ValueError(f"distribution ranks {d1}+{d2} != submanifold dimension {immersion.d}")
    if frames is None:
        frames, pre_skipped = sample_frames(immersion)
    else:
        pre_skipped = []
    skipped = list(pre_skipped)

    orth = antiinv = 0.0
    span_ok = True
    used = 0
    for idx, fr in frames:
        try:
            Wb = normalized_generators(fr, dbot)
            Wl = normalized_generators(fr, dlam)
            dec = tn_decompose(fr)
        except GeometryError as err:
            skipped.append((idx, str(err)))
            continue
        used += 1
        if d1 and d2:
            orth = max(orth, max_abs(Wb.T @ fr.g @ Wl))
        if matrix_rank(fr.T @ np.hstack([Wb, Wl])) < immersion.d:
            span_ok = False
        if d1:
            antiinv = max(antiinv, float(np.linalg.norm(fr.T @ (dec.t @ Wb), axis=0).max()))
    if used == 0:
        raise GeometryError("no usable sample points for the decomposition check")

    slant = (
        slant_analyze(immersion, dlam, tol_classify=tol_classify, frames=frames)
        if d2
        else None
    )

    structure_ok = orth <= tol_classify and span_ok and antiinv <= tol_classify
    if not structure_ok:
        verdict = "NotPRPseudoSlant"
    elif d2 == 0:
        verdict = "AntiInvariantSubmanifold"
    elif slant.classification == "NotSlant":
        verdict = "NotPRPseudoSlant"
    elif d1 == 0:
        verdict = (
            "InvariantSubmanifold" if slant.classification == "Invariant" else "SlantSubmanifold"
        )
    elif slant.classification == "ProperSlant":
        verdict = "ProperPRPseudoSlant"
    elif slant.classification == "Invariant":
        verdict = "PRSubmanifold"
    else:  # AntiInvariant slant factor: the whole tangent bundle is anti-invariant
        verdict = "AntiInvariantSubmanifold"
    proper = bool(d1 and d2 and slant is not None and slant.is_proper_slant and structure_ok)
    return DecompReport(
        d1=d1,
        d2=d2,
        orth_residual=orth,
        span_rank_ok=span_ok,
        antiinv_residual=antiinv,
        slant=slant,
        verdict=verdict,
        proper=proper,
        points_used=used,
        skipped=tuple(skipped),
    )


@dataclass(frozen=True)
class BracketReport:
    residual: float  # max out-of-span bracket component (scale-free)
    integrable: bool
    points_used: int


def integrability_test(
    immersion: Immersion,
    dist: Distribution,
    *,
    tol: float = 1e-7,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> BracketReport:
    """Frobenius oracle: brackets of the generators stay in the span."""
    if frames is None:
        frames, _ = sample_frames(immersion)
    worst = 0.0
    used = 0
    gens = dist.generators
    for _, fr in frames:
        W = dist.matrix_at(fr.point)
        try:
            norms = np.linalg.norm(fr.T @ W, axis=0) if W.shape[1] else np.array([])
            if W.shape[1] and np.any(norms < 1e-13):
                continue
            for i in range(len(gens)):
                for j in range(i + 1, len(gens)):
                    br = lie_bracket(fr, gens[i], gens[j]).coeffs
                    out = _out_of_span(fr, W, br)
                    scale = norms[i] * norms[j]
                    worst = max(worst, float(np.linalg.norm(fr.T @ out)) / scale)
        except GeometryError:
            continue
        used += 1
    if used == 0:
        raise GeometryError("no usable sample points for the integrability test")
    return BracketReport(residual=worst, integrable=worst <= tol, points_used=used)


def foliation_test(
    immersion: Immersion,
    dist: Distribution,
    *,
    tol: float = 1e-7,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> BracketReport:
    """Direct totally-geodesic oracle: nabla_X Y stays in the distribution
    for generator fields X, Y (the out-of-span part is tensorial)."""
    if frames is None:
        frames, _ = sample_frames(immersion)
    worst = 0.0
    used = 0
    gens = dist.generators
    for _, fr in frames:
        W = dist.matrix_at(fr.point)
        try:
            norms = np.linalg.norm(fr.T @ W, axis=0) if W.shape[1] else np.array([])
            if W.shape[1] and np.any(norms < 1e-13):
                continue
            for i in range(len(gens)):
                for j in range(len(gens)):
                    nab = induced_connection(fr, gens[i], gens[j]).coeffs
                    out = _out_of_span(fr, W, nab)
                    scale = norms[i] * norms[j]
                    worst = max(worst, float(np.linalg.norm(fr.T @ out)) / scale)
        except GeometryError:
            continue
        used += 1
    if used == 0:
        raise GeometryError("no usable sample points for the foliation test")
    return BracketReport(residual=worst, integrable=worst <= tol, points_used=used)


@dataclass(frozen=True)
class ConditionReport:
    """A printed criterion evaluated next to its direct oracle."""

    name: str
    condition_residual: float
    oracle_residual: float
    condition_verdict: str
    oracle_verdict: str
    agreement: bool | None  # None when either side is inconclusive or vacuous
    identity_residual: float | None  # the proof identity, when one is printed
    vacuous: bool
    points_used: int

    @property
    def ok(self) -> bool:
        return self.vacuous or self.agreement is True


def _agreement(cond_verdict: str, oracle_verdict: str) -> bool | None:
    if INCONCLUSIVE in (cond_verdict, oracle_verdict):
        return None
    return (cond_verdict == PASS) == (oracle_verdict == PASS)


def _condition_report(
    name: str,
    cond: float,
    oracle: float,
    tol: float,
    structural: float,
    identity: float | None,
    vacuous: bool,
    used: int,
) -> ConditionReport:
    if vacuous:
        return ConditionReport(
            name=name,
            condition_residual=cond,
            oracle_residual=oracle,
            condition_verdict=VACUOUS,
            oracle_verdict=classify_residual(oracle, tol, structural),
            agreement=None,
            identity_residual=identity,
            vacuous=True,
            points_used=used,
        )
    cv = classify_residual(cond, tol, structural)
    ov = classify_residual(oracle, tol, structural)
    return ConditionReport(
        name=name,
        condition_residual=cond,
        oracle_residual=oracle,
        condition_verdict=cv,
        oracle_verdict=ov,
        agreement=_agreement(cv, ov),
        identity_residual=identity,
        vacuous=False,
        points_used=used,
    )


def _shape_normal_part(fr: PointFrame, dec, coeffs: np.ndarray) -> np.ndarray:
    """Shape operator w.r.t. the normal part of P applied to a tangent vector."""
    zeta = fr.N @ (dec.n @ coeffs)
    return shape_operator_ambient(fr, zeta)


def integrability_criterion_dbot(
    immersion: Immersion,
    dbot: Distribution,
    dlam: Distribution,
    *,
    lam_hat: float,
    tol: float = 1e-7,
    structural: float = DEFAULT_STRUCTURAL_TOL,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> ConditionReport:
    """Integrability criterion for the anti-invariant distribution:
    g(A_{PY}X, tZ) = g(A_{PX}Y, tZ) for X, Y in D_bot, Z in D_lam.

    Also evaluates the proof identity
    lam * g([X, Y], Z) = g(A_{PY}X, tZ) - g(A_{PX}Y, tZ) on the raw
    generator fields, and cross-checks the criterion against the bracket
    oracle.
    """
    if frames is None:
        frames, _ = sample_frames(immersion)
    # rank-1 D_bot is a trivial pass ([X, X] = 0), not a vacuous case
    vacuous = dbot.rank == 0 or dlam.rank == 0
    cond = identity = 0.0
    used = 0
    for _, fr in frames:
        try:
            Wb = normalized_generators(fr, dbot)
            Wl = normalized_generators(fr, dlam)
            dec = tn_decompose(fr)
        except GeometryError:
            continue
        used += 1
        shapes = [_shape_normal_part(fr, dec, Wb[:, i]) for i in range(Wb.shape[1])]
        tWl = dec.t @ Wl
        for i in range(Wb.shape[1]):
            for j in range(Wb.shape[1]):
                for l in range(Wl.shape[1]):
                    lhs = fr.metric_pair(shapes[j] @ Wb[:, i], tWl[:, l])
                    rhs = fr.metric_pair(shapes[i] @ Wb[:, j], tWl[:, l])
                    cond = max(cond, abs(lhs - rhs))
        # proof identity on the raw fields (brackets need actual fields)
        for i, Xf in enumerate(dbot.generators):
            for j, Yf in enumerate(dbot.generators):
                br = lie_bracket(fr, Xf, Yf).coeffs
                Xv, Yv = Xf.values_at(fr.point), Yf.values_at(fr.point)
                nx = np.linalg.norm(fr.T @ Xv) * np.linalg.norm(fr.T @ Yv)
                if nx < 1e-13:
                    continue
                Ax = _shape_normal_part(fr, dec, Xv)
                Ay = _shape_normal_part(fr, dec, Yv)
                for Zf in dlam.generators:
                    Zv = Zf.values_at(fr.point)
                    nz = np.linalg.norm(fr.T @ Zv)
                    if nz < 1e-13:
                        continue
                    lhs = lam_hat * fr.metric_pair(br, Zv)
                    rhs = fr.metric_pair(Ay @ Xv, dec.t @ Zv) - fr.metric_pair(
                        Ax @ Yv, dec.t @ Zv
                    )
                    identity = max(identity, abs(lhs - rhs) / (nx * nz))
    if used == 0:
        raise GeometryError("no usable sample points")
    oracle = integrability_test(immersion, dbot, tol=tol, frames=frames).residual
    return _condition_report(
        "D_bot integrable (anti-invariant factor)",
        cond,
        oracle,
        tol,
        structural,
        identity,
        vacuous,
        used,
    )


def integrability_criterion_dlam(
    immersion: Immersion,
    dbot: Distribution,
    dlam: Distribution,
    *,
    tol: float = 1e-7,
    structural: float = DEFAULT_STRUCTURAL_TOL,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> ConditionReport:
    """Integrability criterion for the slant distribution:
    g(A_{ntZ}X - A_{PX}tZ, W) = g(A_{ntW}X - A_{PX}tW, Z)
    for X in D_bot and Z, W in D_lam, against the bracket oracle."""
    if frames is None:
        frames, _ = sample_frames(immersion)
    vacuous = dbot.rank == 0 or dlam.rank == 0
    cond = 0.0
    used = 0
    for _, fr in frames:
        try:
            Wb = normalized_generators(fr, dbot)
            Wl = normalized_generators(fr, dlam)
            dec = tn_decompose(fr)
        except GeometryError:
            continue
        used += 1
        tWl = dec.t @ Wl
        shapes_nt = [_shape_normal_part(fr, dec, tWl[:, l]) for l in range(Wl.shape[1])]
        shapes_px = [_shape_normal_part(fr, dec, Wb[:, i]) for i in range(Wb.shape[1])]
        for i in range(Wb.shape[1]):
            X = Wb[:, i]
            for a in range(Wl.shape[1]):
                for b in range(Wl.shape[1]):
                    Z, W = Wl[:, a], Wl[:, b]
                    lhs = fr.metric_pair(shapes_nt[a] @ X - shapes_px[i] @ tWl[:, a], W)
                    rhs = fr.metric_pair(shapes_nt[b] @ X - shapes_px[i] @ tWl[:, b], Z)
                    cond = max(cond, abs(lhs - rhs))
    if used == 0:
        raise GeometryError("no usable sample points")
    oracle = integrability_test(immersion, dlam, tol=tol, frames=frames).residual
    return _condition_report(
        "D_lam integrable (slant factor)", cond, oracle, tol, structural, None, vacuous, used
    )


def foliation_condition_dbot(
    immersion: Immersion,
    dbot: Distribution,
    dlam: Distribution,
    *,
    tol: float = 1e-7,
    structural: float = DEFAULT_STRUCTURAL_TOL,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> ConditionReport:
    """Totally-geodesic-foliation criterion for D_bot:
    g(A_{PY}X, tZ) = g(A_{ntZ}X, Y), against the connection oracle."""
    if frames is None:
        frames, _ = sample_frames(immersion)
    vacuous = dbot.rank == 0 or dlam.rank == 0
    cond = 0.0
    used = 0
    for _, fr in frames:
        try:
            Wb = normalized_generators(fr, dbot)
            Wl = normalized_generators(fr, dlam)
            dec = tn_decompose(fr)
        except GeometryError:
            continue
        used += 1
        tWl = dec.t @ Wl
        shapes_py = [_shape_normal_part(fr, dec, Wb[:, j]) for j in range(Wb.shape[1])]
        shapes_nt = [_shape_normal_part(fr, dec, tWl[:, l]) for l in range(Wl.shape[1])]
        for i in range(Wb.shape[1]):
            for j in range(Wb.shape[1]):
                for l in range(Wl.shape[1]):
                    lhs = fr.metric_pair(shapes_py[j] @ Wb[:, i], tWl[:, l])
                    rhs = fr.metric_pair(shapes_nt[l] @ Wb[:, i], Wb[:, j])
                    cond = max(cond, abs(lhs - rhs))
    if used == 0:
        raise GeometryError("no usable sample points")
    oracle = foliation_test(immersion, dbot, tol=tol, frames=frames).residual
    return _condition_report(
        "D_bot defines a totally geodesic foliation",
        cond,
        oracle,
        tol,
        structural,
        None,
        vacuous,
        used,
    )


def foliation_condition_dlam(
    immersion: Immersion,
    dbot: Distribution,
    dlam: Distribution,
    *,
    tol: float = 1e-7,
    structural: float = DEFAULT_STRUCTURAL_TOL,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> ConditionReport:
    """Totally-geodesic-foliation criterion for D_lam:
    g(A_{ntW}Z, X) = g(A_{PX}Z, tW), against the connection oracle."""
    if frames is None:
        frames, _ = sample_frames(immersion)
    vacuous = dbot.rank == 0 or dlam.rank == 0
    cond = 0.0
    used = 0
    for _, fr in frames:
        try:
            Wb = normalized_generators(fr, dbot)
            Wl = normalized_generators(fr, dlam)
            dec = tn_decompose(fr)
        except GeometryError:
            continue
        used += 1
        tWl = dec.t @ Wl
        shapes_nt = [_shape_normal_part(fr, dec, tWl[:, l]) for l in range(Wl.shape[1])]
        shapes_px = [_shape_normal_part(fr, dec, Wb[:, i]) for i in range(Wb.shape[1])]
        for i in range(Wb.shape[1]):
            for a in range(Wl.shape[1]):
                for b in range(Wl.shape[1]):
                    lhs = fr.metric_pair(shapes_nt[b] @ Wl[:, a], Wb[:, i])
                    rhs = fr.metric_pair(shapes_px[i] @ Wl[:, a], tWl[:, b])
                    cond = max(cond, abs(lhs - rhs))
    if used == 0:
        raise GeometryError("no usable sample points")
    oracle = foliation_test(immersion, dlam, tol=tol, frames=frames).residual
    return _condition_report(
        "D_lam defines a totally geodesic foliation",
        cond,
        oracle,
        tol,
        structural,
        None,
        vacuous,
        used,
    )
