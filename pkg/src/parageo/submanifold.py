"""Immersions and their per-point frame data: induced metric, normal
complement, second fundamental form, shape operators, induced connection,
intrinsic gradients and Lie brackets.

Everything is computed from exact 2-jets of the coordinate expressions, so
tangential/normal splits use Gram-matrix solves against the ambient metric;
no frame is ever orthonormalized (square roots of negative norms would be
needed for timelike directions in neutral signature).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ambient import AmbientSpace
from .errors import (
    DegenerateMetric,
    DegenerateNormal,
    DimensionMismatch,
    RankDeficient,
)
from .linalg import checked_solve, matrix_rank, rref_nullspace
from .scalarfield import Const, Expr, Jet2, eval_jet2

__all__ = [
    "Box",
    "Exclusion",
    "SamplePlan",
    "Immersion",
    "PointFrame",
    "TangentVec",
    "NormalVec",
    "VectorField",
    "Distribution",
    "coordinate_field",
    "frame_at",
    "sample_points",
    "sample_frames",
    "second_fundamental_form",
    "shape_operator",
    "shape_operator_ambient",
    "induced_connection",
    "ambient_field_derivative",
    "gradient_on_manifold",
    "lie_bracket",
    "metric_derivatives",
]

DEGENERACY_RTOL = 1e-10  # |det g| >= rtol * scale^d with scale = max column norm


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch("domain lo/hi lengths differ")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ValueError("domain box must have lo < hi on every axis")

    @property
    def d(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class Exclusion:
    """Excluded hyperplane x_var = value (1-based variable index)."""

    var: int
    value: float
    margin: float = 1e-6


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sample plan: grid^d interior points plus seeded randoms."""

    grid: int = 5
    random: int = 20
    seed: int = 1234


@dataclass(frozen=True)
class Immersion:
    ambient: AmbientSpace
    coords: tuple[Expr, ...]  # length 2m
    domain: Box
    exclusions: tuple[Exclusion, ...] = ()
    plan: SamplePlan = field(default_factory=SamplePlan)

    def __post_init__(self):
        if len(self.coords) != self.ambient.dim:
            raise DimensionMismatch(
                f"need {self.ambient.dim} coordinate expressions, got {len(self.coords)}"
            )

    @property
    def d(self) -> int:
        return self.domain.d


@dataclass(frozen=True)
class PointFrame:
    """Frame data of an immersion at one parameter point.

    T columns are the coordinate tangent vectors dOmega/dx_i, d2 holds all
    second partials, g = T^T G T is the induced metric and N spans the
    G-orthogonal complement of the tangent space.
    """

    ambient: AmbientSpace
    point: np.ndarray  # (d,)
    values: np.ndarray  # (2m,)
    T: np.ndarray  # (2m, d)
    d2: np.ndarray  # (2m, d, d)
    g: np.ndarray  # (d, d)
    N: np.ndarray  # (2m, 2m-d)
    gn: np.ndarray  # (2m-d, 2m-d), G restricted to the normal basis

    @property
    def d(self) -> int:
        return self.T.shape[1]

    def tangential_coeffs(self, w: np.ndarray) -> np.ndarray:
        """Frame coefficients of the tangential part of an ambient vector."""
        b = self.T.T @ (self.ambient.G @ np.asarray(w, float))
        return checked_solve(self.g, b, DegenerateMetric, "induced metric")

    def normal_coeffs(self, w: np.ndarray) -> np.ndarray:
        """Normal-basis coefficients of the normal part of an ambient vector."""
        b = self.N.T @ (self.ambient.G @ np.asarray(w, float))
        return checked_solve(self.gn, b, DegenerateNormal, "normal metric")

    def split(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.tangential_coeffs(w), self.normal_coeffs(w)

    def tangent_ambient(self, coeffs: np.ndarray) -> np.ndarray:
        return self.T @ np.asarray(coeffs, float)

    def normal_ambient(self, coeffs: np.ndarray) -> np.ndarray:
        return self.N @ np.asarray(coeffs, float)

    def metric_pair(self, a: np.ndarray, b: np.ndarray) -> float:
        """Induced-metric pairing of two tangent coefficient vectors."""
        return float(np.asarray(a, float) @ self.g @ np.asarray(b, float))


def _require_same_frame(a: "TangentVec | NormalVec", b: "TangentVec | NormalVec") -> None:
    if a.frame is not b.frame:
        pa, pb = a.frame.point, b.frame.point
        raise DimensionMismatch(f"vectors live at different points: {pa} vs {pb}")


@dataclass(frozen=True)
class TangentVec:
    frame: PointFrame
    coeffs: np.ndarray  # (d,)

    @property
    def ambient(self) -> np.ndarray:
        return self.frame.tangent_ambient(self.coeffs)


@dataclass(frozen=True)
class NormalVec:
    frame: PointFrame
    coeffs: np.ndarray  # (2m-d,)

    @property
    def ambient(self) -> np.ndarray:
        return self.frame.normal_ambient(self.coeffs)


@dataclass(frozen=True)
class VectorField:
    """Tangent vector field given by coefficient expressions over the
    coordinate frame."""

    coeffs: tuple[Expr, ...]

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def values_at(self, p: np.ndarray) -> np.ndarray:
        return np.array([eval_jet2(c, p).value for c in self.coeffs])

    def jacobian_at(self, p: np.ndarray) -> np.ndarray:
        """J[j, i] = d coeff_j / d x_i."""
        return np.array([eval_jet2(c, p).grad for c in self.coeffs])


def coordinate_field(d: int, index: int) -> VectorField:
    """The coordinate frame field for x<index> (1-based)."""
    return VectorField(tuple(Const(1.0 if j == index - 1 else 0.0) for j in range(d)))


@dataclass(frozen=True)
class Distribution:
    """Sub-bundle of the tangent bundle spanned by generator fields."""

    generators: tuple[VectorField, ...]

    @property
    def rank(self) -> int:
        return len(self.generators)

    def matrix_at(self, p: np.ndarray) -> np.ndarray:
        """(d, k) matrix whose columns are generator coefficients at p."""
        if not self.generators:
            return np.zeros((len(p), 0))
        return np.column_stack([gen.values_at(p) for gen in self.generators])


# ---------------------------------------------------------------------------
# Frames and sampling
# ---------------------------------------------------------------------------


def frame_at(immersion: Immersion, p) -> PointFrame:
    """Evaluate the tangent frame, induced metric and normal complement at p.

    Raises RankDeficient / DegenerateMetric / DegenerateNormal when the
    corresponding guard fails.
    """
    point = np.asarray(p, dtype=float)
    d, n = immersion.d, immersion.ambient.dim
    if point.shape != (d,):
        raise DimensionMismatch(f"expected point of length {d}, got {point.shape}")
    jets: list[Jet2] = [eval_jet2(c, point) for c in immersion.coords]
    values = np.array([j.value for j in jets])
    T = np.array([j.grad for j in jets])  # (2m, d)
    d2 = np.array([j.hess for j in jets])  # (2m, d, d)
    G = immersion.ambient.G

    scale = float(np.linalg.norm(T, axis=0).max(initial=0.0))
    if scale == 0.0:
        raise RankDeficient(f"tangent frame vanishes at {point.tolist()}")
    rank = matrix_rank(T)
    if rank < d:
        raise RankDeficient(f"tangent frame has rank {rank} < {d} at {point.tolist()}")

    g = T.T @ G @ T
    det = float(np.linalg.det(g))
    if abs(det) < DEGENERACY_RTOL * scale ** (2 * d):
        raise DegenerateMetric(
            f"induced metric degenerate at {point.tolist()} (|det g| = {abs(det):.3e})"
        )

    N, _ = rref_nullspace(T.T @ G)
    if N.shape[1] != n - d:
        raise DegenerateNormal(
            f"normal space has dimension {N.shape[1]} != {n - d} at {point.tolist()}"
        )
    gn = N.T @ G @ N
    det_n = float(np.linalg.det(gn)) if N.shape[1] else 1.0
    n_scale = float(np.linalg.norm(N, axis=0).max(initial=1.0))
    if abs(det_n) < DEGENERACY_RTOL * n_scale ** (2 * (n - d)):
        raise DegenerateNormal(
            f"ambient metric restricted to the normal space is singular at {point.tolist()}"
        )
    return PointFrame(
        ambient=immersion.ambient, point=point, values=values, T=T, d2=d2, g=g, N=N, gn=gn
    )


def sample_points(immersion: Immersion) -> tuple[list[np.ndarray], list[tuple[int, str]]]:
    """Deterministic sample points: interior grid plus seeded randoms.

    Grid points sit on a grid^d lattice offset 5% from the domain boundary.
    Points violating an exclusion margin are skipped and reported as
    (index, reason) pairs; indices refer to the full generated sequence.
    """
    box = immersion.domain
    d = box.d
    lo = np.asarray(box.lo, float)
    hi = np.asarray(box.hi, float)
    plan = immersion.plan

    points: list[np.ndarray] = []
    k = plan.grid
    if k >= 1:
        axes = []
        for i in range(d):
            if k == 1:
                ticks = np.array([0.5])
            else:
                ticks = 0.05 + 0.9 * np.arange(k) / (k - 1)
            axes.append(lo[i] + (hi[i] - lo[i]) * ticks)
        mesh = np.meshgrid(*axes, indexing="ij")
        grid_pts = np.stack([mm.ravel() for mm in mesh], axis=1)
        points.extend(grid_pts)
    rng = np.random.default_rng(plan.seed)
    for _ in range(plan.random):
        points.append(lo + (hi - lo) * rng.random(d))

    kept: list[np.ndarray] = []
    skipped: list[tuple[int, str]] = []
    for idx, pt in enumerate(points):
        reason = None
        for exc in immersion.exclusions:
            if abs(pt[exc.var - 1] - exc.value) < exc.margin:
                reason = f"within margin of excluded hyperplane x{exc.var} = {exc.value}"
                break
        if reason is None:
            kept.append(np.asarray(pt, float))
        else:
            skipped.append((idx, reason))
    return kept, skipped


def sample_frames(
    immersion: Immersion,
) -> tuple[list[tuple[int, PointFrame]], list[tuple[int, str]]]:
    """Frames over the sample plan; guard failures are skipped and reported."""
    pts, skipped = sample_points(immersion)
    frames: list[tuple[int, PointFrame]] = []
    for idx, pt in enumerate(pts):
        try:
            frames.append((idx, frame_at(immersion, pt)))
        except (RankDeficient, DegenerateMetric, DegenerateNormal) as err:
            skipped.append((idx, str(err)))
    return frames, skipped


# ---------------------------------------------------------------------------
# Gauss-Weingarten operations
# ---------------------------------------------------------------------------


def second_fundamental_form(frame: PointFrame, X: TangentVec, Y: TangentVec) -> NormalVec:
    """h(X, Y): normal part of the ambient second derivative (tensorial)."""
    _require_same_frame(X, Y)
    if X.frame is not frame:
        raise DimensionMismatch("vectors do not live at the given frame's point")
    s = np.einsum("aij,i,j->a", frame.d2, X.coeffs, Y.coeffs)
    return NormalVec(frame, frame.normal_coeffs(s))


def shape_operator_ambient(frame: PointFrame, zeta_ambient: np.ndarray) -> np.ndarray:
    """Matrix of A_zeta in the coordinate frame for an ambient normal vector.

    Valid whenever zeta is normal; only g(h(., .), zeta) enters, so any
    tangential contamination of zeta is ignored by construction.
    """
    gz = frame.ambient.G @ np.asarray(zeta_ambient, float)
    H = np.einsum("aij,a->ij", frame.d2, gz)
    return checked_solve(frame.g, H, DegenerateMetric, "induced metric")


def shape_operator(frame: PointFrame, zeta: NormalVec) -> np.ndarray:
    if zeta.frame is not frame:
        raise DimensionMismatch("normal vector does not live at the given frame's point")
    return shape_operator_ambient(frame, zeta.ambient)


def ambient_field_derivative(frame: PointFrame, X: VectorField, Y: VectorField) -> np.ndarray:
    """Ambient directional derivative D_X (Y^ambient) at the frame's point."""
    p = frame.point
    Xv = X.values_at(p)
    Yv = Y.values_at(p)
    Jy = Y.jacobian_at(p)
    term1 = frame.T @ (Jy @ Xv)
    term2 = np.einsum("aji,j,i->a", frame.d2, Yv, Xv)
    return term1 + term2


def induced_connection(frame: PointFrame, X: VectorField, Y: VectorField) -> TangentVec:
    """nabla_X Y at the frame's point (tangential part of the Gauss formula)."""
    w = ambient_field_derivative(frame, X, Y)
    return TangentVec(frame, frame.tangential_coeffs(w))


def gradient_on_manifold(frame: PointFrame, f: Expr) -> TangentVec:
    """Intrinsic gradient: solves g . c = (df/dx_i)_i at the frame's point."""
    rhs = eval_jet2(f, frame.point).grad
    return TangentVec(
        frame, checked_solve(frame.g, rhs, DegenerateMetric, "induced metric")
    )


def lie_bracket(frame: PointFrame, X: VectorField, Y: VectorField) -> TangentVec:
    """[X, Y] at the frame's point from coefficient-field derivatives."""
    p = frame.point
    Xv, Yv = X.values_at(p), Y.values_at(p)
    Jx, Jy = X.jacobian_at(p), Y.jacobian_at(p)
    return TangentVec(frame, Jy @ Xv - Jx @ Yv)


def metric_derivatives(frame: PointFrame) -> np.ndarray:
    """dg[k][i, j] = d g_ij / d x_k, exact from the coordinate jets."""
    G = frame.ambient.G
    # d_k g_ij = gbar(d2[:, i, k], T_j) + gbar(T_i, d2[:, j, k])
    A = np.einsum("aik,ab,bj->kij", frame.d2, G, frame.T)
    return A + np.transpose(A, (0, 2, 1))
