"""Command-line interface: bench, match, and color-match subcommands."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import BenchConfig, run_benchmark
from .color import apply_cdl, cdl_xml_write, color_match, read_png, write_png
from .color.image import RgbImage
from .estimator import ReswdConfig
from .numeric import SampleSet
from .optimize import DEFAULT_PARTICLE_LR, Adam, match_particles

__all__ = ["main"]


class PointFileError(ValueError):
    pass


def load_points(path: str) -> np.ndarray:
    """Read a point list: one point per line, whitespace/comma separated.

    Lines starting with '#' and blank lines are ignored.
    """
    rows: list[list[float]] = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise PointFileError(f"cannot read point file {path}: {exc}") from exc
    with fh:
        for ln, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.replace(",", " ").split()
            try:
                row = [float(p) for p in parts]
            except ValueError:
                raise PointFileError(f"{path}: line {ln}: malformed point {s!r}") from None
            if rows and len(row) != len(rows[0]):
                raise PointFileError(
                    f"{path}: line {ln}: expected {len(rows[0])} coordinates, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise PointFileError(f"{path}: contains no points")
    return np.asarray(rows, dtype=np.float64)


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--projections", type=int, default=64, help="total per-step direction budget")
    p.add_argument("--fresh", type=int, default=8, help="fresh directions per step")
    p.add_argument("--p", type=float, default=2.0, help="transport cost exponent")
    p.add_argument("--alpha", type=float, default=0.5, help="reservoir reset threshold factor")
    p.add_argument("--tau", type=float, default=0.0, help="time-decay constant (0 disables)")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reswd", description="Sliced distribution matching tools")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="synthetic distribution-matching benchmark")
    b.add_argument("--pairs", type=int, default=1000, help="number of distribution pairs")
    b.add_argument("--samples", type=int, default=1024, help="samples per side")
    b.add_argument("--steps", type=int, default=300, help="optimization steps per run")
    b.add_argument("--dim", type=int, default=3, help="sample dimension")
    b.add_argument("--seeds-per-pair", type=int, default=1, help="independent seeds per pair")
    b.add_argument("--lr", type=float, default=DEFAULT_PARTICLE_LR, help="Adam learning rate")
    b.add_argument("--ablation", type=int, nargs="*", default=[], help="extra fresh counts to test")
    b.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel worker processes")
    b.add_argument("--out", required=True, help="output directory for CSV/JSON")
    _add_estimator_flags(b)

    m = sub.add_parser("match", help="free-particle matching between two point files")
    m.add_argument("--source", required=True, help="point file to move")
    m.add_argument("--target", required=True, help="point file to match")
    m.add_argument("--steps", type=int, default=300)
    m.add_argument("--mode", choices=["swd", "reswd"], default="reswd")
    m.add_argument("--lr", type=float, default=DEFAULT_PARTICLE_LR)
    m.add_argument("--out", required=True, help="output directory")
    _add_estimator_flags(m)

    c = sub.add_parser("color-match", help="fit a CDL grade matching a reference image")
    c.add_argument("--source", required=True, help="source PNG")
    c.add_argument("--reference", required=True, help="reference PNG")
    c.add_argument("--steps", type=int, default=150)
    c.add_argument("--lr", type=float, default=2e-2)
    c.add_argument("--mode", choices=["swd", "reswd"], default="reswd")
    c.add_argument("--out", required=True, help="output CDL XML path")
    c.add_argument("--preview", default=None, help="optional graded full-resolution PNG path")
    _add_estimator_flags(c)
    return parser


def _estimator_config(args: argparse.Namespace) -> ReswdConfig:
    return ReswdConfig(
        total_projections=args.projections,
        fresh_count=args.fresh,
        p=args.p,
        alpha=args.alpha,
        tau=args.tau,
        seed=args.seed,
    )


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        cfg = BenchConfig(
            n_pairs=args.pairs,
            n_samples=args.samples,
            steps=args.steps,
            dim=args.dim,
            projections=args.projections,
            fresh=args.fresh,
            p=args.p,
            alpha=args.alpha,
            tau=args.tau,
            seed=args.seed,
            seeds_per_pair=args.seeds_per_pair,
            lr=args.lr,
            ablation_fresh=tuple(args.ablation),
            jobs=args.jobs,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_benchmark(cfg)
    try:
        result.write_csv(args.out)
        path = result.write_summary(args.out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    for method, pair_idx, rep, err in result.failed_runs:
        print(f"warning: run failed ({method}, pair {pair_idx}, rep {rep}): {err}", file=sys.stderr)
    print(json.dumps(result.summary(), indent=2, sort_keys=True))
    print(f"wrote {path}")
    return 0


def cmd_match(args: argparse.Namespace) -> int:
    try:
        X0 = load_points(args.source)
        Y = load_points(args.target)
    except PointFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if X0.shape[1] != Y.shape[1]:
        print(
            f"error: dimension mismatch: {args.source} has {X0.shape[1]} columns, "
            f"{args.target} has {Y.shape[1]}",
            file=sys.stderr,
        )
        return 2
    try:
        cfg = _estimator_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = match_particles(
        SampleSet(X0), SampleSet(Y), cfg, args.steps, Adam(lr=args.lr), mode=args.mode
    )
    try:
        os.makedirs(args.out, exist_ok=True)
        report.to_csv(os.path.join(args.out, "trajectory.csv"))
        np.savetxt(os.path.join(args.out, "final_points.txt"), report.final_samples, fmt="%.12g")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    final = report.records[-1]
    print(f"final loss {final.loss:.6g}, final mean_w1 {final.mean_w1:.6g}")
    return 0


def cmd_color_match(args: argparse.Namespace) -> int:
    try:
        source = read_png(args.source)
        reference = read_png(args.reference)
    except IOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = _estimator_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cdl, report = color_match(
        source, reference, cfg, steps=args.steps, lr=args.lr, mode=args.mode
    )
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(cdl_xml_write(cdl))
        if args.preview:
            graded = RgbImage(apply_cdl(source.pixels, cdl))
            write_png(args.preview, graded)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    print(cdl_xml_write(cdl), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "match":
            return cmd_match(args)
        if args.command == "color-match":
            return cmd_color_match(args)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
