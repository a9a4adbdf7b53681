"""Command-line interface.

Commands:
  parageo verify-ambient SCENE      check the ambient structure equations
  parageo analyze SCENE             run the full pipeline
  parageo check-slant SCENE DIST    slant analysis of one named distribution
  parageo check-warped SCENE NAME   one named warped declaration
  parageo reproduce-example         run the built-in worked example
  parageo corpus                    list / dump the built-in corpus scenes

Exit codes: 0 all verdicts pass, 1 at least one Fail verdict, 2 scene or
expression parse error, 3 numerical guard failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import GeometryError, ParageoError, SceneError
from .pipeline import analyze, check_slant, check_warped, verify_ambient
from .report import exit_code, render_text, to_json
from .scenes import (
    GOLDEN_SCENE_NAME,
    Scene,
    corpus_names,
    corpus_scene,
    corpus_toml,
    load_scene,
)
from .submanifold import SamplePlan

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_GUARD = 3


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="also write the structured JSON report")
    common.add_argument("--json", action="store_true", help="print JSON instead of text")
    common.add_argument("--tol", type=float, help="override the identity tolerance")
    common.add_argument("--seed", type=int, help="override the sample-plan seed")
    common.add_argument("--grid", type=int, help="override the grid resolution per axis")

    parser = argparse.ArgumentParser(
        prog="parageo",
        description="Verify pseudo-slant and warped-product structure of immersions "
        "into flat neutral ambients with a product structure.",
    )
    parser.set_defaults(out=None, json=False, tol=None, seed=None, grid=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "verify-ambient", parents=[common], help="check the ambient structure equations"
    )
    p.add_argument("scene")
    p = sub.add_parser("analyze", parents=[common], help="run the full analysis pipeline")
    p.add_argument("scene")
    p = sub.add_parser("check-slant", parents=[common], help="slant analysis of one distribution")
    p.add_argument("scene")
    p.add_argument("distribution")
    p = sub.add_parser("check-warped", parents=[common], help="analyze one warped declaration")
    p.add_argument("scene")
    p.add_argument("name")
    sub.add_parser(
        "reproduce-example", parents=[common], help="run the built-in worked example scene"
    )
    p = sub.add_parser("corpus", help="list corpus scenes, or dump one as TOML")
    p.add_argument("name", nargs="?", help="scene to dump (omit to list)")
    return parser


def _load(args) -> Scene:
    path = Path(args.scene)
    if not path.exists() and args.scene in corpus_names():
        scene = corpus_scene(args.scene)
    else:
        scene = load_scene(path)
    return _apply_overrides(scene, args)


def _apply_overrides(scene: Scene, args) -> Scene:
    plan = scene.immersion.plan
    if args.seed is not None or args.grid is not None:
        plan = SamplePlan(
            grid=args.grid if args.grid is not None else plan.grid,
            random=plan.random,
            seed=args.seed if args.seed is not None else plan.seed,
        )
        scene = replace(scene, immersion=replace(scene.immersion, plan=plan))
    if args.tol is not None:
        scene = replace(
            scene, tolerances=replace(scene.tolerances, identity=float(args.tol))
        )
    return scene


def _emit(report: dict, args) -> int:
    text = to_json(report) if args.json else render_text(report)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(to_json(report), encoding="utf-8")
    return EXIT_FAIL if exit_code(report) else EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "corpus":
            if args.name is None:
                sys.stdout.write("\n".join(corpus_names()) + "\n")
                return EXIT_OK
            sys.stdout.write(corpus_toml(args.name))
            return EXIT_OK
        if args.command == "reproduce-example":
            scene = _apply_overrides(corpus_scene(GOLDEN_SCENE_NAME), args)
            return _emit(analyze(scene), args)
        if args.command == "verify-ambient":
            return _emit(verify_ambient(_load(args)), args)
        if args.command == "analyze":
            return _emit(analyze(_load(args)), args)
        if args.command == "check-slant":
            return _emit(check_slant(_load(args), args.distribution), args)
        if args.command == "check-warped":
            return _emit(check_warped(_load(args), args.name), args)
        raise AssertionError(f"unhandled command {args.command}")
    except SceneError as err:
        print(f"scene error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except GeometryError as err:
        print(f"numerical guard failure: {err}", file=sys.stderr)
        return EXIT_GUARD
    except ParageoError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
