"""Report serialization: schema-versioned JSON and a CSV bundle for plotting."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .config import config_to_dict
from .errors import ReportIOError
from .pipeline import InvarianceReport

SCHEMA = "sis-invariance/1"


def _frac(x) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def report_to_dict(report: InvarianceReport) -> dict:
    cfg = report.config
    grid = cfg.grid
    out: dict = {
        "schema": SCHEMA,
        "config": config_to_dict(cfg),
        "generators": [
            {
                "index": j,
                "type": spec.type,
                "norm_squared": s.norm_squared(),
                "tail_energy": t,
            }
            for j, (spec, s, t) in enumerate(zip(cfg.generators, report.spectra, report.tail_energies))
        ],
        "dimension_function": {
            "rel_tol": report.dimension.rel_tol,
            "level_measures": [float(x) for x in report.level_measures],
        },
        "verdicts": [
            {
                "n": n,
                "invariant": v.invariant,
                "subadditive": v.subadditive,
                "failing_fraction": v.failing_fraction,
                "first_failure": v.first_failure,
                "diagnostic": v.diagnostic(),
                "rel_tol": v.rel_tol,
            }
            for n, v in report.verdicts.items()
        ],
        "order": None,
        "ti_check": report.ti,
        "oracle": None,
        "support": [
            {
                "n": b.n,
                "interval": [_frac(b.interval[0]), _frac(b.interval[1])],
                "level_measures": [float(x) for x in b.level_measures],
                "bound": b.bound,
                "slack": b.slack,
                "large_n_bound": b.large_n_bound,
                "generators": [
                    {"generator": g.generator, "zero_measure": g.zero_measure, "passes": g.passes}
                    for g in b.generators
                ],
                "passes": b.passes,
            }
            for b in report.support
        ],
        "frames": None,
        "warnings": list(report.warnings),
        "caveats": list(report.caveats),
        "consistent": report.consistent,
    }
    if report.order is not None:
        o = report.order
        out["order"] = {
            "declared": o.declared,
            "order": o.order,
            "n_max": o.n_max,
            "translation_invariant_candidate": o.translation_invariant_candidate,
            "divisor_consistent": o.divisor_consistent,
            "lcm_consistent": o.lcm_consistent,
            "violations": list(o.violations),
        }
    if report.oracle:
        out["oracle"] = {
            "agreement": report.oracle_agreement,
            "tol": cfg.oracle_tol,
            "verdicts": [
                {
                    "n": n,
                    "invariant": ov.invariant,
                    "max_residual": ov.max_residual,
                    "worst_index": ov.worst_index,
                    "agrees": ov.invariant == report.verdicts[n].invariant,
                }
                for n, ov in report.oracle.items()
            ],
        }
    if report.frames is not None:
        frames = report.frames.as_dict()
        top = max(report.cutoff_frames) if report.cutoff_frames else None
        frames["n"] = top
        frames["per_k"] = report.cutoff_frames[top].as_dict()["per_k"] if top else None
        frames["union"] = report.cutoff_frames[top].union.as_dict() if top else None
        frames["by_n"] = [cf.as_dict() for cf in report.cutoff_frames.values()]
        out["frames"] = frames
    out["grid"] = {"M": grid.M, "K": grid.K, "midpoint": grid.midpoint}
    return out


def report_json(report: InvarianceReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_csv_bundle(report: InvarianceReport, directory) -> list[Path]:
    d = Path(directory)
    omega = report.config.grid.base
    written = []
    try:
        d.mkdir(parents=True, exist_ok=True)
        for n, v in report.verdicts.items():
            p = d / f"rank_n{n}.csv"
            header = ["omega", "rank", "cutoff_rank_sum"] + [f"rank_k{k}" for k in range(n)]
            rows = (
                [repr(float(w)), int(v.ranks[i]), int(v.rank_sums[i])] + [int(x) for x in v.cutoff_ranks[:, i]]
                for i, w in enumerate(omega)
            )
            _write_csv(p, header, rows)
            written.append(p)

        p = d / "dimension.csv"
        _write_csv(p, ["omega", "dimension"], ([repr(float(w)), int(r)] for w, r in zip(omega, report.dimension.ranks)))
        written.append(p)

        p = d / "eigenvalues.csv"
        m = report.eigenvalues.shape[1]
        _write_csv(
            p,
            ["omega"] + [f"eig_{j + 1}" for j in range(m)],
            ([repr(float(w))] + [repr(float(x)) for x in row] for w, row in zip(omega, report.eigenvalues)),
        )
        written.append(p)

        if report.oracle:
            p = d / "residuals.csv"
            ns = list(report.oracle)
            cols = np.stack([report.oracle[n].residuals for n in ns], axis=1)
            _write_csv(
                p,
                ["omega"] + [f"residual_n{n}" for n in ns],
                ([repr(float(w))] + [repr(float(x)) for x in row] for w, row in zip(omega, cols)),
            )
            written.append(p)
    except OSError as exc:
        raise ReportIOError(f"cannot write CSV bundle to {d}: {exc}") from exc
    return written


def emit_report(report: InvarianceReport, fmt: str, path) -> list[Path]:
    """Write ``report`` as ``json`` (a single file) or ``csv-bundle`` (a directory)."""
    if fmt == "json":
        p = Path(path)
        try:
            if p.parent and not p.parent.exists():
                os.makedirs(p.parent, exist_ok=True)
            p.write_text(report_json(report))
        except OSError as exc:
            raise ReportIOError(f"cannot write report to {p}: {exc}") from exc
        return [p]
    if fmt == "csv-bundle":
        return write_csv_bundle(report, path)
    raise ValueError(f"unknown report format {fmt!r}")
