"""Residual-to-verdict classification shared by all analysis reports."""

from __future__ import annotations

PASS = "Pass"
FAIL = "Fail"
INCONCLUSIVE = "Inconclusive"
VACUOUS = "Vacuous"

DEFAULT_IDENTITY_TOL = 1e-8
DEFAULT_CLASSIFICATION_TOL = 1e-8
DEFAULT_STRUCTURAL_TOL = 1e-3


def classify_residual(residual: float, tol: float, structural: float = DEFAULT_STRUCTURAL_TOL) -> str:
    """Pass below tol, Fail above the structural threshold, else Inconclusive.

    The gray zone between numerical noise and structural failure is reported
    honestly instead of being forced to either side.
    """
    if residual <= tol:
        return PASS
    if residual >= structural:
        return FAIL
    return INCONCLUSIVE
