"""Exception types shared across the package."""


class ParageoError(Exception):
    """Base class for every error this package raises on purpose."""


class ExprParseError(ParageoError):
    """Malformed expression source. Carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


class EvalDomainError(ParageoError):
    """Evaluation left the domain of a subexpression.

    Raised for division by zero and for ln/sqrt of a nonpositive value;
    ``source`` is the offending subexpression rendered back to text.
    """

    def __init__(self, message: str, source: str):
        super().__init__(f"{message} in '{source}'")
        self.source = source


class DimensionMismatch(ParageoError):
    """Operands have inconsistent dimensions."""


class GeometryError(ParageoError):
    """A numerical guard failed while evaluating the geometry."""


class RankDeficient(GeometryError):
    """Coordinate tangent frame has rank below the parameter count."""


class DegenerateMetric(GeometryError):
    """An induced metric (or a restriction of it) is numerically singular."""


class DegenerateNormal(GeometryError):
    """The ambient metric restricted to the normal space is singular."""


class NonBlockMetric(GeometryError):
    """Induced metric is not block diagonal over the declared base/fiber split."""


class FiberNotConformal(GeometryError):
    """Fiber metric block is not a conformally constant rescaling across base points."""


class NonPositiveWarp(GeometryError):
    """Estimated squared warping factor is not positive."""


class SceneError(ParageoError):
    """Scene file could not be parsed or validated."""
