"""Scene files: ambient + immersion + distributions + warped declarations.

Scenes are TOML documents (hand-authorable, diff-friendly, parsed strictly).
The built-in corpus used by the verification suite is generated as TOML text
and loaded through the same parser as user scenes.

Schema (see README for the full reference)::

    name = "my-scene"

    [ambient]
    canonical = 3            # or explicit P = [[...]] and G = [[...]]

    [immersion]
    variables = 3
    coords = ["x1", "x1*cos(x2)", ...]     # 2m expressions
    [immersion.domain]
    lo = [0.5, 0.1, 0.5]
    hi = [2.0, 1.4, 2.0]
    [[immersion.exclusions]]               # optional
    var = 3
    value = 0.0
    margin = 1e-6

    [samples]                # optional; defaults grid=5, random=20, seed=1234
    grid = 5
    random = 20
    seed = 1234

    [distributions.Dperp]
    generators = [["0", "1", "0"]]         # coefficient expressions over d vars

    [decomposition]          # optional
    anti_invariant = "Dperp"
    slant = "Dslant"

    [warped.main]            # optional, any number of named declarations
    base = [1, 3]
    fiber = [2]
    f_candidate = "x1"       # optional

    [tolerances]             # optional overrides
    identity = 1e-8
    classification = 1e-8
    structural = 1e-3

    [[paper_values]]         # optional stated-value annotations
    quantity = "slant_coefficient"
    distribution = "Dslant"
    stated = 0.7071067811865476
    note = "..."
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

import numpy as np

from .ambient import AmbientSpace, canonical
from .errors import ExprParseError, SceneError
from .scalarfield import Expr, parse
from .submanifold import (
    Box,
    Distribution,
    Exclusion,
    Immersion,
    SamplePlan,
    VectorField,
)

__all__ = [
    "Tolerances",
    "WarpedDecl",
    "PaperValue",
    "Scene",
    "load_scene",
    "load_scene_text",
    "corpus_scene",
    "corpus_names",
    "golden_scene",
    "GOLDEN_SCENE_NAME",
]

GOLDEN_SCENE_NAME = "golden-cone"


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-8
    classification: float = 1e-8
    structural: float = 1e-3


@dataclass(frozen=True)
class WarpedDecl:
    base: tuple[int, ...]
    fiber: tuple[int, ...]
    f_candidate: Expr | None = None
    f_candidate_source: str | None = None


@dataclass(frozen=True)
class PaperValue:
    quantity: str
    stated: float
    note: str
    distribution: str | None = None


@dataclass(frozen=True)
class Scene:
    name: str
    ambient: AmbientSpace
    immersion: Immersion
    distributions: dict[str, Distribution]
    decomposition: tuple[str, str] | None  # (anti-invariant name, slant name)
    warped: dict[str, WarpedDecl]
    tolerances: Tolerances = field(default_factory=Tolerances)
    paper_values: tuple[PaperValue, ...] = ()


# ---------------------------------------------------------------------------
# Loader
# ---------------------------------------------------------------------------


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise SceneError(f"missing key '{key}' in {where}")
    return table[key]


def _parse_expr(source, d: int, where: str) -> Expr:
    if not isinstance(source, str):
        raise SceneError(f"{where}: expected an expression string, got {source!r}")
    try:
        return parse(source, d)
    except ExprParseError as err:
        raise SceneError(f"{where}: {err}") from err


def _load_ambient(table: dict) -> AmbientSpace:
    if "canonical" in table:
        m = table["canonical"]
        if not isinstance(m, int) or m < 1:
            raise SceneError("[ambient] canonical must be a positive integer")
        return canonical(m)
    if "P" in table and "G" in table:
        P = np.asarray(table["P"], dtype=float)
        G = np.asarray(table["G"], dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape != G.shape or P.shape[0] % 2:
            raise SceneError("[ambient] P and G must be equal square matrices of even size")
        return AmbientSpace(m=P.shape[0] // 2, P=P, G=G)
    raise SceneError("[ambient] needs either 'canonical = m' or explicit 'P' and 'G'")


def load_scene_text(text: str, name: str = "<scene>") -> Scene:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise SceneError(f"scene is not valid TOML: {err}") from err

    scene_name = data.get("name", name)
    ambient = _load_ambient(_need(data, "ambient", "scene"))

    imm = _need(data, "immersion", "scene")
    d = _need(imm, "variables", "[immersion]")
    if not isinstance(d, int) or d < 1:
        raise SceneError("[immersion] variables must be a positive integer")
    coords_src = _need(imm, "coords", "[immersion]")
    if not isinstance(coords_src, list) or len(coords_src) != ambient.dim:
        raise SceneError(
            f"[immersion] coords must list {ambient.dim} expressions, got {len(coords_src)}"
        )
    coords = tuple(
        _parse_expr(src, d, f"[immersion] coords[{i}]") for i, src in enumerate(coords_src)
    )
    dom = _need(imm, "domain", "[immersion]")
    lo = _need(dom, "lo", "[immersion.domain]")
    hi = _need(dom, "hi", "[immersion.domain]")
    if len(lo) != d or len(hi) != d:
        raise SceneError(f"[immersion.domain] lo and hi must have length {d}")
    try:
        box = Box(lo=tuple(float(x) for x in lo), hi=tuple(float(x) for x in hi))
    except (TypeError, ValueError) as err:
        raise SceneError(f"[immersion.domain] invalid box: {err}") from err
    exclusions = []
    for i, exc in enumerate(imm.get("exclusions", [])):
        var = _need(exc, "var", f"[immersion.exclusions][{i}]")
        if not isinstance(var, int) or not 1 <= var <= d:
            raise SceneError(f"[immersion.exclusions][{i}] var must be in 1..{d}")
        exclusions.append(
            Exclusion(
                var=var,
                value=float(_need(exc, "value", f"[immersion.exclusions][{i}]")),
                margin=float(exc.get("margin", 1e-6)),
            )
        )

    samples = data.get("samples", {})
    plan = SamplePlan(
        grid=int(samples.get("grid", 5)),
        random=int(samples.get("random", 20)),
        seed=int(samples.get("seed", 1234)),
    )
    if plan.grid < 1 or plan.random < 0:
        raise SceneError("[samples] grid must be >= 1 and random >= 0")

    immersion = Immersion(
        ambient=ambient, coords=coords, domain=box, exclusions=tuple(exclusions), plan=plan
    )

    distributions: dict[str, Distribution] = {}
    for dist_name, table in data.get("distributions", {}).items():
        gens_src = _need(table, "generators", f"[distributions.{dist_name}]")
        gens = []
        for j, gen in enumerate(gens_src):
            if not isinstance(gen, list) or len(gen) != d:
                raise SceneError(
                    f"[distributions.{dist_name}] generator {j} must list {d} expressions"
                )
            gens.append(
                VectorField(
                    tuple(
                        _parse_expr(src, d, f"[distributions.{dist_name}] generator {j}")
                        for src in gen
                    )
                )
            )
        distributions[dist_name] = Distribution(tuple(gens))

    decomposition = None
    if "decomposition" in data:
        dec = data["decomposition"]
        bot = _need(dec, "anti_invariant", "[decomposition]")
        lam = _need(dec, "slant", "[decomposition]")
        for ref in (bot, lam):
            if ref not in distributions:
                raise SceneError(f"[decomposition] references unknown distribution '{ref}'")
        if distributions[bot].rank + distributions[lam].rank != d:
            raise SceneError(
                "[decomposition] distribution ranks must sum to the parameter count"
            )
        decomposition = (bot, lam)

    warped: dict[str, WarpedDecl] = {}
    for wname, table in data.get("warped", {}).items():
        base = tuple(int(i) for i in _need(table, "base", f"[warped.{wname}]"))
        fiber = tuple(int(i) for i in _need(table, "fiber", f"[warped.{wname}]"))
        if sorted(base + fiber) != list(range(1, d + 1)):
            raise SceneError(f"[warped.{wname}] base and fiber must partition 1..{d}")
        cand_src = table.get("f_candidate")
        cand = (
            None
            if cand_src is None
            else _parse_expr(cand_src, d, f"[warped.{wname}] f_candidate")
        )
        warped[wname] = WarpedDecl(
            base=base, fiber=fiber, f_candidate=cand, f_candidate_source=cand_src
        )

    tols = data.get("tolerances", {})
    tolerances = Tolerances(
        identity=float(tols.get("identity", 1e-8)),
        classification=float(tols.get("classification", 1e-8)),
        structural=float(tols.get("structural", 1e-3)),
    )

    paper_values = []
    for i, pv in enumerate(data.get("paper_values", [])):
        paper_values.append(
            PaperValue(
                quantity=str(_need(pv, "quantity", f"[[paper_values]][{i}]")),
                stated=float(_need(pv, "stated", f"[[paper_values]][{i}]")),
                note=str(pv.get("note", "")),
                distribution=pv.get("distribution"),
            )
        )

    return Scene(
        name=scene_name,
        ambient=ambient,
        immersion=immersion,
        distributions=distributions,
        decomposition=decomposition,
        warped=warped,
        tolerances=tolerances,
        paper_values=tuple(paper_values),
    )


def load_scene(path) -> Scene:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as err:
        raise SceneError(f"cannot read scene file {p}: {err}") from err
    return load_scene_text(text, name=p.stem)


# ---------------------------------------------------------------------------
# Built-in corpus
# ---------------------------------------------------------------------------

_GOLDEN_TOML = """\
name = "golden-cone"

# Cone over a spacelike circle with a flat timelike line: the slant plane is
# spanned by the ruling and the timelike direction, the circle direction is
# anti-invariant, and the circle radius warps with the ruling coordinate.

[ambient]
canonical = 3

[immersion]
variables = 3
coords = ["x1", "x1*cos(x2)", "x1*sin(x2)", "x3", "0.3", "0.7"]

[immersion.domain]
lo = [0.5, 0.1, 0.5]
hi = [2.0, 1.4, 2.0]

[samples]
grid = 5
random = 20
seed = 1234

[distributions.Dperp]
generators = [["0", "1", "0"]]

[distributions.Dslant]
generators = [["1", "0", "0"], ["0", "0", "1"]]

[decomposition]
anti_invariant = "Dperp"
slant = "Dslant"

[warped.main]
base = [1, 3]
fiber = [2]
f_candidate = "x1"

[[paper_values]]
quantity = "slant_coefficient"
distribution = "Dslant"
stated = 0.7071067811865476
note = "stated as 1/sqrt(2); the computed coefficient is the square of that cosine"
"""


def _tilted_plane_toml() -> str:
    cb, sb = math.cos(math.pi / 6), math.sin(math.pi / 6)
    return f"""\
name = "tilted-plane-product"

# Totally geodesic linear immersion: a slant plane at a fixed angle times an
# anti-invariant line, with a product (constant-warp) metric.

[ambient]
canonical = 3

[immersion]
variables = 3
coords = ["x1", "{cb!r}*x1 - {sb!r}*x2", "{sb!r}*x1 + {cb!r}*x2", "x3", "0.1", "-0.4"]

[immersion.domain]
lo = [0.5, 0.5, 0.5]
hi = [2.0, 2.0, 2.0]

[distributions.Dperp]
generators = [["0", "1", "0"]]

[distributions.Dslant]
generators = [["1", "0", "0"], ["0", "0", "1"]]

[decomposition]
anti_invariant = "Dperp"
slant = "Dslant"

[warped.main]
base = [1, 3]
fiber = [2]
"""


_INVARIANT_TOML = """\
name = "invariant-plane"

# A P-invariant coordinate plane: the whole tangent bundle is the slant
# factor with coefficient 1 and the anti-invariant factor is empty.

[ambient]
canonical = 3

[immersion]
variables = 2
coords = ["x1", "0.2", "-0.3", "x2", "0.5", "1.1"]

[immersion.domain]
lo = [0.5, 0.5]
hi = [2.0, 2.0]

[distributions.Dperp]
generators = []

[distributions.Dslant]
generators = [["1", "0"], ["0", "1"]]

[decomposition]
anti_invariant = "Dperp"
slant = "Dslant"
"""


_ANTI_TOML = """\
name = "anti-invariant-cylinder"

# Circle times timelike line whose product-structure image is entirely
# normal: the whole tangent bundle is anti-invariant.

[ambient]
canonical = 3

[immersion]
variables = 2
coords = ["0.4", "1.25*cos(x1)", "1.25*sin(x1)", "x2", "-0.2", "0.9"]

[immersion.domain]
lo = [0.2, 0.5]
hi = [1.2, 2.0]

[distributions.Dperp]
generators = [["1", "0"], ["0", "1"]]

[distributions.Dslant]
generators = []

[decomposition]
anti_invariant = "Dperp"
slant = "Dslant"
"""


def _random_product_toml(tag: str, seed: int) -> str:
    rng = np.random.default_rng(seed)
    a, b, c, radius = (0.6 + rng.random(4)).tolist()
    k1, k2, k3 = (rng.random(3) - 0.5).tolist()
    lam = a * a / (a * a + b * b)
    return f"""\
name = "product-{tag}"

# Randomized trivial product: a constant slant plane (coefficient
# {lam!r}) times an anti-invariant circle in an 8-dimensional ambient.

[ambient]
canonical = 4

[immersion]
variables = 3
coords = [
  "{a!r}*x1",
  "{b!r}*x1",
  "{radius!r}*cos(x2)",
  "{radius!r}*sin(x2)",
  "{c!r}*x3",
  "{k1!r}",
  "{k2!r}",
  "{k3!r}",
]

[immersion.domain]
lo = [0.5, 0.2, 0.5]
hi = [2.0, 1.4, 2.0]

[samples]
seed = {seed}

[distributions.Dperp]
generators = [["0", "1", "0"]]

[distributions.Dslant]
generators = [["1", "0", "0"], ["0", "0", "1"]]

[decomposition]
anti_invariant = "Dperp"
slant = "Dslant"

[warped.main]
base = [1, 3]
fiber = [2]
"""


def _forbidden_toml(eps: float, tag: str, comment: str) -> str:
    if eps:
        fourth = f"x3*(1 + {eps!r}*sin(x1))"
    else:
        fourth = "x3"
    return f"""\
name = "forbidden-{tag}"

# {comment}

[ambient]
canonical = 3

[immersion]
variables = 3
coords = ["x2", "x2*cos(x1)", "x2*sin(x1)", "{fourth}", "0.3", "0.7"]

[immersion.domain]
lo = [0.2, 0.5, 0.5]
hi = [1.3, 2.0, 2.0]

[distributions.Dperp]
generators = [["1", "0", "0"]]

[distributions.Dslant]
generators = [["0", "1", "0"], ["0", "0", "1"]]

[decomposition]
anti_invariant = "Dperp"
slant = "Dslant"

[warped.forbidden]
base = [1]
fiber = [2, 3]
"""


_CORPUS_BUILDERS = {
    GOLDEN_SCENE_NAME: lambda: _GOLDEN_TOML,
    "tilted-plane-product": _tilted_plane_toml,
    "invariant-plane": lambda: _INVARIANT_TOML,
    "anti-invariant-cylinder": lambda: _ANTI_TOML,
    "product-a": lambda: _random_product_toml("a", 7001),
    "product-b": lambda: _random_product_toml("b", 7002),
    "forbidden-warp": lambda: _forbidden_toml(
        0.2,
        "warp",
        "Anti-invariant base warping a slant fiber: the orientation the "
        "non-existence obstruction forbids.  The immersion necessarily breaks "
        "one of the exactness assumptions (here the anti-invariance of the "
        "base); the obstruction check flags the declared structure as "
        "inconsistent.",
    ),
    "forbidden-product": lambda: _forbidden_toml(
        0.0,
        "product",
        "Same declaration with the warp switched off: the fiber block is "
        "constant along the base, so the obstruction is vacuously consistent.",
    ),
}


def corpus_names() -> tuple[str, ...]:
    return tuple(_CORPUS_BUILDERS)


def corpus_scene(name: str) -> Scene:
    """Load a built-in corpus scene by name."""
    if name not in _CORPUS_BUILDERS:
        raise SceneError(f"unknown corpus scene '{name}' (have: {', '.join(_CORPUS_BUILDERS)})")
    return load_scene_text(_CORPUS_BUILDERS[name](), name=name)


def corpus_toml(name: str) -> str:
    """TOML source of a built-in corpus scene."""
    if name not in _CORPUS_BUILDERS:
        raise SceneError(f"unknown corpus scene '{name}' (have: {', '.join(_CORPUS_BUILDERS)})")
    return _CORPUS_BUILDERS[name]()


def golden_scene() -> Scene:
    """The worked-example scene reproduced by the `reproduce-example` command."""
    return corpus_scene(GOLDEN_SCENE_NAME)
