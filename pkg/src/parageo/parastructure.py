"""Tangential/normal decomposition of the product structure along an
immersion, slant classification of distributions, and the fundamental-form
identities.

Conventions: applying P to a tangent vector splits as P(TX) = T(tX) + N(nX);
applying P to a normal vector splits as P(N zeta) = T(t' zeta) + N(n' zeta).
All operator matrices are expressed in the coordinate frame / normal basis of
one PointFrame.

Sign factors in the quadratic identities (g(tX, tY) vs lambda g(X, Y) and its
normal-part companion) are measured rather than assumed, and a mismatch with
the conventionally printed +1 is reported as a first-class discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetric, DegenerateNormal, GeometryError
from .linalg import checked_solve, matrix_rank, max_abs
from .submanifold import (
    Distribution,
    Immersion,
    PointFrame,
    VectorField,
    lie_bracket,
    sample_frames,
)

__all__ = [
    "TNDecomposition",
    "SlantReport",
    "SignedIdentity",
    "TIdentityReport",
    "tn_decompose",
    "recomposition_residuals",
    "normalized_generators",
    "slant_analyze",
    "verify_t_identities",
    "omega_value",
    "domega",
    "omega_and_domega",
]

NOTSLANT_RTOL = 1e-6  # relative deviation of t^2 from lambda*I beyond which we refuse to classify


@dataclass(frozen=True)
class TNDecomposition:
    """Blocks of P in the (tangent frame | normal basis) splitting."""

    frame: PointFrame
    t: np.ndarray  # (d, d)
    n: np.ndarray  # (q, d)
    t_prime: np.ndarray  # (d, q)
    n_prime: np.ndarray  # (q, q)


def tn_decompose(frame: PointFrame) -> TNDecomposition:
    """Split P applied to the frame and normal basis via Gram solves."""
    amb = frame.ambient
    G, P = amb.G, amb.P
    PT = P @ frame.T
    PN = P @ frame.N
    t = checked_solve(frame.g, frame.T.T @ G @ PT, DegenerateMetric, "induced metric")
    n = checked_solve(frame.gn, frame.N.T @ G @ PT, DegenerateNormal, "normal metric")
    t_prime = checked_solve(frame.g, frame.T.T @ G @ PN, DegenerateMetric, "induced metric")
    n_prime = checked_solve(frame.gn, frame.N.T @ G @ PN, DegenerateNormal, "normal metric")
    return TNDecomposition(frame=frame, t=t, n=n, t_prime=t_prime, n_prime=n_prime)


def recomposition_residuals(dec: TNDecomposition) -> tuple[float, float]:
    """Max-abs residuals of P(TX) = T(tX) + N(nX) and its normal companion,
    relative to the frame scale."""
    fr = dec.frame
    P = fr.ambient.P
    scale = max(1.0, max_abs(fr.T), max_abs(fr.N))
    r_tan = max_abs(P @ fr.T - (fr.T @ dec.t + fr.N @ dec.n)) / scale
    r_nor = max_abs(P @ fr.N - (fr.T @ dec.t_prime + fr.N @ dec.n_prime)) / scale
    return r_tan, r_nor


def normalized_generators(frame: PointFrame, dist: Distribution) -> np.ndarray:
    """Generator coefficient matrix with unit-Euclidean-norm ambient columns.

    Normalizing makes every residual downstream scale-free.  Raises
    GeometryError when the generators are dependent at this point.
    """
    W = dist.matrix_at(frame.point)
    if W.shape[1] == 0:
        return W
    U = frame.T @ W
    norms = np.linalg.norm(U, axis=0)
    if np.any(norms < 1e-13):
        raise GeometryError(
            f"distribution generator vanishes at {frame.point.tolist()}"
        )
    W = W / norms
    if matrix_rank(frame.T @ W) < W.shape[1]:
        raise GeometryError(
            f"distribution generators dependent at {frame.point.tolist()}"
        )
    return W


@dataclass(frozen=True)
class SlantReport:
    classification: str  # Invariant | AntiInvariant | ProperSlant | NotSlant
    lam_hat: float
    per_point_lambda: tuple[float, ...]
    spread: float
    deviation: float  # max ||t^2 X - lam_hat X|| over unit generators
    antisym_residual: float  # max |g(tX, Y) + g(X, tY)|
    t_norm_max: float
    n_norm_max: float
    leak: float  # max out-of-distribution component of tX
    angle: float | None  # acos(sqrt(lam)) when lam in [0, 1], else None
    points_used: int
    skipped: tuple[tuple[int, str], ...] = field(default_factory=tuple)

    @property
    def is_proper_slant(self) -> bool:
        return self.classification == "ProperSlant"


def slant_analyze(
    immersion: Immersion,
    dist: Distribution,
    *,
    tol_classify: float = 1e-8,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> SlantReport:
    """Estimate the slant coefficient of a distribution and classify it.

    The tangential operator t is restricted to the distribution by the
    g-orthogonal projection of its image; lambda is the least-squares scalar
    fit of the restricted t^2 against the identity over all sample points and
    generators.
    """
    if dist.rank == 0:
        raise ValueError("slant analysis needs at least one generator")
    if frames is None:
        frames, pre_skipped = sample_frames(immersion)
    else:
        pre_skipped = []
    skipped: list[tuple[int, str]] = list(pre_skipped)

    lam_points: list[float] = []
    per_point: list[tuple[PointFrame, np.ndarray, np.ndarray]] = []  # (frame, W, t2W)
    t_norm = n_norm = leak = antisym = 0.0

    for idx, fr in frames:
        try:
            W = normalized_generators(fr, dist)
            dec = tn_decompose(fr)
            gram = W.T @ fr.g @ W
            tW = dec.t @ W
            C = checked_solve(gram, W.T @ fr.g @ tW, DegenerateMetric, "distribution metric")
        except GeometryError as err:
            skipped.append((idx, str(err)))
            continue
        k = W.shape[1]
        lam_points.append(float(np.trace(C @ C)) / k)
        per_point.append((fr, W, dec.t @ tW))
        t_norm = max(t_norm, float(np.linalg.norm(fr.T @ tW, axis=0).max()))
        n_norm = max(n_norm, float(np.linalg.norm(fr.N @ (dec.n @ W), axis=0).max()))
        leak = max(leak, float(np.linalg.norm(fr.T @ (tW - W @ C), axis=0).max(initial=0.0)))
        antisym = max(antisym, max_abs(W.T @ fr.g @ tW + tW.T @ fr.g @ W))

    if not lam_points:
        raise GeometryError("no usable sample points for slant analysis")

    lam_hat = float(np.mean(lam_points))
    spread = float(np.max(lam_points) - np.min(lam_points))
    deviation = 0.0
    for fr, W, t2W in per_point:
        deviation = max(
            deviation, float(np.linalg.norm(fr.T @ (t2W - lam_hat * W), axis=0).max())
        )

    if t_norm <= tol_classify:
        classification = "AntiInvariant"
    elif abs(lam_hat - 1.0) <= tol_classify and n_norm <= tol_classify:
        classification = "Invariant"
    elif deviation <= NOTSLANT_RTOL and antisym <= NOTSLANT_RTOL and leak <= NOTSLANT_RTOL:
        classification = "ProperSlant"
    else:
        classification = "NotSlant"

    angle = math.acos(math.sqrt(lam_hat)) if 0.0 <= lam_hat <= 1.0 else None
    return SlantReport(
        classification=classification,
        lam_hat=lam_hat,
        per_point_lambda=tuple(lam_points),
        spread=spread,
        deviation=deviation,
        antisym_residual=antisym,
        t_norm_max=t_norm,
        n_norm_max=n_norm,
        leak=leak,
        angle=angle,
        points_used=len(lam_points),
        skipped=tuple(skipped),
    )


@dataclass(frozen=True)
class SignedIdentity:
    """A quadratic identity whose overall sign is measured, not assumed."""

    name: str
    empirical_sign: int
    printed_sign: int
    residual: float  # with the empirical sign
    residual_printed: float  # with the sign as printed

    @property
    def disagrees_with_printed(self) -> bool:
        return self.empirical_sign != self.printed_sign


@dataclass(frozen=True)
class TIdentityReport:
    lam_hat: float
    quadratic_t: SignedIdentity  # g(tX, tY) ?= eps_t * lam * g(X, Y)
    quadratic_n: SignedIdentity  # gbar(nX, nY) ?= eps_n * (1 - lam) * g(X, Y)
    tprime_residual: float  # t'(nX) - (1 - lam) X
    nprime_residual: float  # n'(nX) + n(tX)
    points_used: int


def _signed(name: str, lhs_accum: list[np.ndarray], rhs_accum: list[np.ndarray]) -> SignedIdentity:
    plus = max(max_abs(l - r) for l, r in zip(lhs_accum, rhs_accum))
    minus = max(max_abs(l + r) for l, r in zip(lhs_accum, rhs_accum))
    if minus < plus:
        return SignedIdentity(name, -1, +1, minus, plus)
    return SignedIdentity(name, +1, +1, plus, plus)


def verify_t_identities(
    immersion: Immersion,
    dist: Distribution,
    *,
    lam_hat: float | None = None,
    frames: list[tuple[int, PointFrame]] | None = None,
) -> TIdentityReport:
    """Check the quadratic and mixed t/n identities on a slant distribution.

    Evaluates, over the sample plan and unit generators X, Y:
      (a) g(tX, tY)  vs  lam g(X, Y)        (sign measured)
      (b) gbar(nX, nY)  vs  (1 - lam) g(X, Y) (sign measured)
      (c) t'(nX) = (1 - lam) X
      (d) n'(nX) = -n(tX)
    """
    if frames is None:
        frames, _ = sample_frames(immersion)
    if lam_hat is None:
        lam_hat = slant_analyze(immersion, dist, frames=frames).lam_hat

    lhs_t, rhs_t = [], []
    lhs_n, rhs_n = [], []
    res_tp = res_np = 0.0
    used = 0
    for _, fr in frames:
        try:
            W = normalized_generators(fr, dist)
            dec = tn_decompose(fr)
        except GeometryError:
            continue
        used += 1
        tW = dec.t @ W
        nW = dec.n @ W
        lhs_t.append(tW.T @ fr.g @ tW)
        rhs_t.append(lam_hat * (W.T @ fr.g @ W))
        lhs_n.append(nW.T @ fr.gn @ nW)
        rhs_n.append((1.0 - lam_hat) * (W.T @ fr.g @ W))
        res_tp = max(
            res_tp,
            float(
                np.linalg.norm(
                    fr.T @ (dec.t_prime @ nW - (1.0 - lam_hat) * W), axis=0
                ).max()
            ),
        )
        res_np = max(
            res_np,
            float(np.linalg.norm(fr.N @ (dec.n_prime @ nW + dec.n @ tW), axis=0).max()),
        )
    if used == 0:
        raise GeometryError("no usable sample points for identity checks")
    return TIdentityReport(
        lam_hat=lam_hat,
        quadratic_t=_signed("g(tX,tY) = eps * lam * g(X,Y)", lhs_t, rhs_t),
        quadratic_n=_signed("g(nX,nY) = eps * (1 - lam) * g(X,Y)", lhs_n, rhs_n),
        tprime_residual=res_tp,
        nprime_residual=res_np,
        points_used=used,
    )


# ---------------------------------------------------------------------------
# Fundamental 2-form
# ---------------------------------------------------------------------------


def _field_ambient_jacobian(frame: PointFrame, V: VectorField) -> np.ndarray:
    """d/dx_i of the ambient representative of a tangent field, shape (2m, d)."""
    Jv = V.jacobian_at(frame.point)
    Vv = V.values_at(frame.point)
    return frame.T @ Jv + np.einsum("aji,j->ai", frame.d2, Vv)


def omega_value(frame: PointFrame, X: VectorField, Y: VectorField) -> float:
    """omega(X, Y) = gbar(X, P Y) of the ambient representatives."""
    amb = frame.ambient
    xa = frame.T @ X.values_at(frame.point)
    ya = frame.T @ Y.values_at(frame.point)
    return float(xa @ amb.G @ amb.P @ ya)


def domega(frame: PointFrame, X: VectorField, Y: VectorField, Z: VectorField) -> float:
    """Exterior derivative of omega on a field triple.

    Evaluated from the cyclic directional derivatives of the omega values
    minus the omega of Lie brackets, all with the 1/3 normalization; the
    directional derivatives come from the jets, not finite differences.
    """
    amb = frame.ambient
    GP = amb.G @ amb.P
    fields = (X, Y, Z)
    vals = [f.values_at(frame.point) for f in fields]
    ambs = [frame.T @ v for v in vals]
    jacs = [_field_ambient_jacobian(frame, f) for f in fields]

    def omega_pair(a: np.ndarray, b: np.ndarray) -> float:
        return float(a @ GP @ b)

    def deriv_term(i: int, j: int, k: int) -> float:
        # fields[i] applied to omega(fields[j], fields[k])
        domega_dx = jacs[j].T @ GP @ ambs[k] + ambs[j] @ GP @ jacs[k]
        return float(vals[i] @ domega_dx)

    def bracket_amb(i: int, j: int) -> np.ndarray:
        return frame.T @ lie_bracket(frame, fields[i], fields[j]).coeffs

    total = (
        deriv_term(0, 1, 2)
        + deriv_term(1, 2, 0)
        + deriv_term(2, 0, 1)
        - omega_pair(bracket_amb(0, 1), ambs[2])
        - omega_pair(bracket_amb(1, 2), ambs[0])
        - omega_pair(bracket_amb(2, 0), ambs[1])
    )
    return total / 3.0


def omega_and_domega(
    frame: PointFrame, X: VectorField, Y: VectorField, Z: VectorField
) -> tuple[float, float]:
    """(omega(X, Y), domega(X, Y, Z)) at the frame's point."""
    return omega_value(frame, X, Y), domega(frame, X, Y, Z)
