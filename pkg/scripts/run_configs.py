"""Run every JSON config in a directory through the full analysis and print a one-line summary each."""
import argparse
import sys
from pathlib import Path

from sis_invariance.config import parse_config
from sis_invariance.pipeline import run_analysis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", nargs="?", default=Path(__file__).resolve().parent.parent / "configs")
    args = ap.parse_args()

    bad = 0
    for path in sorted(Path(args.directory).glob("*.json")):
        report = run_analysis(parse_config(path.read_text()))
        frames = report.frames
        fb = f"A={frames.A:.4f} B={frames.B:.4f}" if frames else "frames skipped"
        print(
            f"{path.name:<24} order {str(report.order.declared):<6} ti={report.ti!s:<5} "
            f"oracle agrees={report.oracle_agreement!s:<5} {fb} warnings={len(report.warnings)}"
        )
        bad += not report.consistent
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
