"""Command-line entry point: ``sis-invariance analyze <config.json>``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import parse_config
from .errors import ConfigError, GridError, ReportIOError, SpectrumError
from .pipeline import AnalysisError, run_analysis
from .report import emit_report, report_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3


def _grid_arg(text: str) -> tuple[int, int]:
    try:
        m, k = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M,K (two integers), got {text!r}")
    return m, k


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sis-invariance",
        description="Translation invariance of finitely generated shift-invariant spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", help="run the full analysis on a JSON config")
    p.add_argument("config", help="path to the analysis config (JSON)")
    p.add_argument("--n-max", type=int, help="largest n to test")
    p.add_argument("--grid", type=_grid_arg, metavar="M,K", help="samples per unit and fiber half-width")
    p.add_argument("--tol", type=float, help="relative rank tolerance")
    p.add_argument("--oracle-tol", type=float, help="relative residual tolerance of the oracle")
    p.add_argument("--csv-dir", help="write the CSV bundle here")
    p.add_argument("-o", "--output", help="write the JSON report here (default: stdout)")
    p.add_argument("--no-oracle", action="store_true", help="skip the projection cross-check")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def analyze(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = parse_config(text)
        overrides = dict(n_max=args.n_max, rel_tol=args.tol, oracle_tol=args.oracle_tol)
        if args.grid is not None:
            overrides.update(samples_per_unit=args.grid[0], fiber_half_width=args.grid[1])
        cfg = cfg.with_overrides(**overrides)
        if args.no_oracle:
            cfg = cfg.with_overrides(analyses=replace(cfg.analyses, oracle=False))
        if args.output or args.csv_dir:
            cfg = cfg.with_overrides(
                outputs=replace(
                    cfg.outputs,
                    report=args.output or cfg.outputs.report,
                    csv_dir=args.csv_dir or cfg.outputs.csv_dir,
                )
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        report = run_analysis(cfg)
    except AnalysisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        validation = isinstance(exc.cause, (GridError, SpectrumError))
        return EXIT_INVALID if validation else EXIT_ERROR

    try:
        if cfg.outputs.report:
            emit_report(report, "json", cfg.outputs.report)
        else:
            sys.stdout.write(report_json(report))
        if cfg.outputs.csv_dir:
            emit_report(report, "csv-bundle", cfg.outputs.csv_dir)
    except ReportIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.consistent:
        print("error: report is internally inconsistent (see warnings)", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    if args.command == "analyze":
        return analyze(args)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
