#!/usr/bin/env python3
"""
vertical-relpose CLI - relative pose from three points and a known vertical

Subcommands:
    solve     minimal sample from a correspondence file → all pose hypotheses (JSON)
    ransac    many correspondences → best pose and inlier mask (JSON)
    simulate  synthetic noise / vertical-error / planar sweeps → CSV
    selftest  structural checks of the algebraic solver and timing
"""

from pathlib import Path
from typing import List, NoReturn, Optional
import argparse
import json
import logging
import sys

from . import __version__
from .config import load_scene_config
from .correspondences import ingest_correspondences
from .exceptions import SelfTestError, VerticalRelposeError
from .pipeline import estimate_from_rays
from .ransac import RansacConfig, ransac_3pt
from .report import ReportRenderer, record_to_csv
from .simulation import (
    SceneConfig,
    run_noise_sweep,
    run_planar_sweep,
    run_vertical_sweep,
    sweep_levels,
)
from .solver import GENERIC_FORM_SEED, SolverOptions, selftest

EPILOG = (
    "Examples:\n"
    "  vrp solve pair.json                              # all hypotheses as JSON\n"
    "  vrp ransac matches.yaml --threshold 0.003 -o pose.json\n"
    "  vrp simulate --motion sideway --sigma-max 1.0    # noise sweep CSV on stdout\n"
    "  vrp simulate --sweep vertical --sigma 0.5 -o vert.csv --latex\n"
    "  vrp --seed 3 selftest --repeats 500"
)

# SceneConfig fields exposed as flags: (flag, field, type, help)
SCENE_FLAGS = (
    ("--baseline", "baseline", float, "distance between camera centres (default 0.3)"),
    ("--fov", "fov", float, "horizontal field of view in degrees (default 45)"),
    ("--width", "width", int, "image width in pixels (default 352)"),
    ("--height", "height", int, "image height in pixels (default 288)"),
    ("--depth-min", "depth_min", float, "nearest point depth (default 0.5)"),
    ("--depth-max", "depth_max", float, "farthest point depth (default 2.5)"),
    ("--plane-depth", "plane_depth", float, "plane depth in planar mode (default 2)"),
    ("--sigma", "sigma", float, "pixel noise for vertical sweeps (default 0)"),
    ("--vertical-error", "vertical_error", float, "vertical error in degrees for noise sweeps"),
    ("--trials", "trials", int, "instances per level (default 2500)"),
    ("--points", "points", int, "correspondences per instance (default 8)"),
    ("--max-tilt", "max_tilt", float, "camera roll/pitch bound in degrees (default 10)"),
    ("--max-yaw", "max_yaw", float, "relative yaw bound in degrees (default 10)"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrp",
        description="3-point relative pose with a known vertical direction",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    solver_args = argparse.ArgumentParser(add_help=False)
    solver_args.add_argument(
        "--form-seed",
        type=int,
        default=GENERIC_FORM_SEED,
        help=f"seed of the action matrix linear form (default {GENERIC_FORM_SEED})",
    )

    file_args = argparse.ArgumentParser(add_help=False)
    file_args.add_argument("input_file", type=Path, help="correspondence file (JSON or YAML)")
    file_args.add_argument(
        "--format", choices=["auto", "json", "yaml"], default="auto", help="input format"
    )
    file_args.add_argument("-o", "--output", type=Path, help="write JSON here instead of stdout")

    sub.add_parser(
        "solve",
        parents=[file_args, solver_args],
        help="solve the first three matches, print every hypothesis",
    )

    p = sub.add_parser("ransac", parents=[file_args, solver_args], help="robust estimate")
    p.add_argument("--threshold", type=float, default=0.005, help="inlier angle in radians")
    p.add_argument("--confidence", type=float, default=0.99, help="RANSAC confidence")
    p.add_argument("--max-iterations", type=int, default=500, help="iteration cap")

    p = sub.add_parser("simulate", parents=[solver_args], help="synthetic sweeps → CSV")
    p.add_argument("--config", type=Path, help="YAML/JSON file of scene settings")
    p.add_argument(
        "--sweep",
        choices=["noise", "vertical", "planar"],
        default="noise",
        help="swept quantity (planar: noise sweep on a plane)",
    )
    p.add_argument("--sigma-max", type=float, default=1.0, help="largest noise level in px")
    p.add_argument("--sigma-step", type=float, default=0.2, help="noise level step in px")
    p.add_argument("--vertical-max", type=float, default=0.5, help="largest vertical error")
    p.add_argument("--vertical-step", type=float, default=0.1, help="vertical error step")
    p.add_argument("--motion", choices=["sideway", "forward"], default=None, help="camera motion")
    for flag, dest, kind, text in SCENE_FLAGS:
        p.add_argument(flag, dest=dest, type=kind, default=None, help=text)
    p.add_argument("--planar", action="store_true", default=None, help="points on a plane")
    p.add_argument("-o", "--output", type=Path, help="write CSV here instead of stdout")
    p.add_argument("--latex", action="store_true", help="also write a LaTeX table (.tex)")
    p.add_argument(
        "--no-timing", action="store_true", help="leave mean_solve_us empty (byte-stable CSV)"
    )
    p.add_argument(
        "--workers", type=int, default=None, help="run trials in this many processes"
    )

    p = sub.add_parser("selftest", help="structural checks of the solver")
    p.add_argument("--repeats", type=int, default=200, help="timed solves")
    p.add_argument("--strict", action="store_true", help="stop at the first failed check")
    return parser


def _emit_json(data: dict, output: Optional[Path]) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if output:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text, encoding="utf-8")
        print(f"✅ Result written: {output}")
    else:
        sys.stdout.write(text)


def _require_file(parser: argparse.ArgumentParser, path: Optional[Path]) -> None:
    if path is not None and not path.is_file():
        parser.error(f"file not found: {path}")


def _cmd_solve(args) -> int:
    data = ingest_correspondences(args.input_file, args.format)
    estimate = estimate_from_rays(
        data.correspondences(),
        data.vertical1,
        data.vertical2,
        SolverOptions(form_seed=args.form_seed),
    )
    _emit_json(estimate.to_dict(), args.output)
    if estimate.selected is None:
        print("❌ No hypothesis puts the points in front of both cameras", file=sys.stderr)
        return 1
    return 0


def _cmd_ransac(args) -> int:
    data = ingest_correspondences(args.input_file, args.format)
    R_ver1, R_ver2 = data.vertical_rotations()
    cfg = RansacConfig(
        threshold=args.threshold,
        confidence=args.confidence,
        max_iterations=args.max_iterations,
        seed=args.seed or 0,
    )
    result = ransac_3pt(
        data.correspondences(), R_ver1, R_ver2, cfg, SolverOptions(form_seed=args.form_seed)
    )
    out = {
        "hypotheses": [result.pose.to_dict()] if result.success else [],
        "selected": 0 if result.success else None,
        "inlier_mask": result.to_dict()["inlier_mask"],
        "inliers": result.inlier_count,
        "iterations": result.iterations,
    }
    _emit_json(out, args.output)
    if not result.success:
        print("❌ No hypothesis reached 3 inliers", file=sys.stderr)
        return 1
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_scene_config(args.config) if args.config else SceneConfig()
    overrides = {dest: getattr(args, dest) for _, dest, _, _ in SCENE_FLAGS}
    overrides["planar"] = args.planar
    overrides["seed"] = args.seed
    cfg = cfg.with_overrides(**overrides)
    options = SolverOptions(form_seed=args.form_seed)
    timing = not args.no_timing

    if args.sweep == "vertical":
        levels = sweep_levels(args.vertical_max, args.vertical_step)
        record = run_vertical_sweep(cfg, levels, options, timing, args.workers)
    else:
        levels = sweep_levels(args.sigma_max, args.sigma_step)
        sweep = run_planar_sweep if args.sweep == "planar" else run_noise_sweep
        record = sweep(cfg, levels, options, timing, args.workers)

    text = record_to_csv(record, args.output)
    if args.output:
        print(f"✅ CSV created: {args.output} ({len(record.rows)} levels x {cfg.trials} trials)")
    else:
        sys.stdout.write(text)
    if args.latex:
        tex_path = (args.output or Path(f"{args.sweep}_sweep.csv")).with_suffix(".tex")
        ReportRenderer().record_latex(record, output=tex_path)
        # stdout may carry the CSV itself
        stream = sys.stdout if args.output else sys.stderr
        print(f"📄 LaTeX table: {tex_path}", file=stream)
    if record.total_failures:
        logging.getLogger(__name__).warning("%d trials failed", record.total_failures)
    return 0


def _cmd_selftest(args) -> int:
    seed = args.seed or 0
    print(f"🔨 Running solver self-test (seed {seed}, {args.repeats} timed solves)...")
    report = selftest(seed=seed, repeats=args.repeats, strict=args.strict)
    print(ReportRenderer().selftest_text(report), end="")
    if not report.passed:
        for fact in report.failures():
            print(
                f"❌ {fact.name}: expected {fact.expected}, observed {fact.observed}",
                file=sys.stderr,
            )
        return 1
    print("✅ All structural checks passed")
    return 0


COMMANDS = {
    "solve": _cmd_solve,
    "ransac": _cmd_ransac,
    "simulate": _cmd_simulate,
    "selftest": _cmd_selftest,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and return the exit status.

    Usage errors (unknown flags, missing files) exit with status 2 through
    argparse; library errors return 1 after a ``❌`` diagnostic on stderr.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    _require_file(parser, getattr(args, "input_file", None))
    _require_file(parser, getattr(args, "config", None))

    try:
        return COMMANDS[args.command](args)
    except SelfTestError as e:
        print(f"❌ Self-test failed: {e}", file=sys.stderr)
        return 1
    except VerticalRelposeError as e:
        print(f"❌ {args.command.capitalize()} error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        return 1


def main() -> NoReturn:
    """Main entry point for the vrp CLI command."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
