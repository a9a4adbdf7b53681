"""Numerical tensor calculus on submanifolds of flat para-Kahler ambients.

The package parses immersions given by scalar expressions, evaluates their
Gauss-Weingarten data with exact second-order forward derivatives, classifies
anti-invariant / slant distribution pairs, and verifies the warped-product
structure equations on concrete scenes.
"""

__version__ = "0.1.0"

from .ambient import AmbientSpace, canonical, verify_structure
from .errors import (
    DegenerateMetric,
    DegenerateNormal,
    DimensionMismatch,
    EvalDomainError,
    ExprParseError,
    FiberNotConformal,
    GeometryError,
    NonBlockMetric,
    NonPositiveWarp,
    ParageoError,
    RankDeficient,
    SceneError,
)
from .parastructure import slant_analyze, tn_decompose, verify_t_identities
from .pipeline import analyze, check_slant, check_warped, verify_ambient
from .scalarfield import Expr, Jet2, eval_jet2, parse, to_source
from .scenes import Scene, corpus_names, corpus_scene, golden_scene, load_scene
from .submanifold import (
    Box,
    Distribution,
    Immersion,
    PointFrame,
    SamplePlan,
    VectorField,
    coordinate_field,
    frame_at,
    gradient_on_manifold,
    induced_connection,
    lie_bracket,
    second_fundamental_form,
    shape_operator,
)
from .warped import detect_warped

__all__ = [
    "__version__",
    "AmbientSpace",
    "canonical",
    "verify_structure",
    "parse",
    "eval_jet2",
    "to_source",
    "Expr",
    "Jet2",
    "Box",
    "SamplePlan",
    "Immersion",
    "PointFrame",
    "Distribution",
    "VectorField",
    "coordinate_field",
    "frame_at",
    "second_fundamental_form",
    "shape_operator",
    "induced_connection",
    "gradient_on_manifold",
    "lie_bracket",
    "tn_decompose",
    "slant_analyze",
    "verify_t_identities",
    "detect_warped",
    "Scene",
    "load_scene",
    "corpus_scene",
    "corpus_names",
    "golden_scene",
    "analyze",
    "verify_ambient",
    "check_slant",
    "check_warped",
    "ParageoError",
    "ExprParseError",
    "EvalDomainError",
    "DimensionMismatch",
    "GeometryError",
    "RankDeficient",
    "DegenerateMetric",
    "DegenerateNormal",
    "NonBlockMetric",
    "FiberNotConformal",
    "NonPositiveWarp",
    "SceneError",
]
