"""End-to-end analysis: evaluate generators, test every n, cross-check, bound supports and frames."""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .config import AnalysisConfig
from .errors import SISError
from .fiber import RankProfile, dimension_function, gramian_field
from .frames import CutoffFrameReport, FrameBounds, cutoff_frame_check, frame_bounds
from .invariance import (
    InvarianceVerdict,
    OrderResult,
    SupportBudget,
    invariance_order,
    rank_level_sets,
    ti_check,
    zero_set_bound_check,
)
from .oracle import OracleVerdict, invariance_oracle
from .spectrum import SampledSpectrum, evaluate, tail_energy

log = logging.getLogger(__name__)


class AnalysisError(SISError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    try:
        yield
    except AnalysisError:
        raise
    except (SISError, ValueError, FloatingPointError) as exc:
        raise AnalysisError(name, exc) from exc


@dataclass(eq=False)
class InvarianceReport:
    config: AnalysisConfig
    spectra: list[SampledSpectrum]
    tail_energies: list[float | None]
    dimension: RankProfile
    eigenvalues: np.ndarray  # (M, m) Gramian eigenvalues, ascending
    level_measures: np.ndarray
    verdicts: dict[int, InvarianceVerdict]
    order: OrderResult | None = None
    ti: bool | None = None
    oracle: dict[int, OracleVerdict] = field(default_factory=dict)
    support: list[SupportBudget] = field(default_factory=list)
    frames: FrameBounds | None = None
    cutoff_frames: dict[int, CutoffFrameReport] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    @property
    def invariant_ns(self) -> list[int]:
        return [n for n, v in self.verdicts.items() if v.invariant]

    @property
    def oracle_agreement(self) -> bool | None:
        if not self.oracle:
            return None
        return all(self.oracle[n].invariant == self.verdicts[n].invariant for n in self.oracle)

    @property
    def consistent(self) -> bool:
        ok = all(v.subadditive for v in self.verdicts.values())
        if self.order is not None:
            ok = ok and self.order.consistent
        return ok


def run_analysis(config: AnalysisConfig) -> InvarianceReport:
    grid = config.grid
    tol = config.rel_tol

    with _stage("spectrum"):
        spectra = [evaluate(spec, grid) for spec in config.generators]
        tails = [tail_energy(spec, grid) for spec in config.generators]

    with _stage("fiber"):
        dim = dimension_function(spectra, grid, tol)
        eigs = gramian_field(spectra).eigenvalues()
        levels = rank_level_sets(spectra, grid, tol)

    with _stage("invariance"):
        order = invariance_order(spectra, config.n_max, grid, tol)
        ti = ti_check(spectra, grid, tol)

    report = InvarianceReport(
        config=config,
        spectra=spectra,
        tail_energies=tails,
        dimension=dim,
        eigenvalues=eigs,
        level_measures=levels,
        verdicts=order.verdicts,
        order=order if config.analyses.order else None,
        ti=ti if config.analyses.order else None,
    )

    for msg in order.violations:
        report.warnings.append(f"subgroup law violated (numerical tolerance failure): {msg}")
    for n, v in order.verdicts.items():
        if not v.subadditive:
            report.warnings.append(f"n={n}: rank exceeds the cutoff rank sum at some cell")
    if ti and order.order is not None:
        failed = [n for n, v in order.verdicts.items() if not v.invariant]
        report.warnings.append(
            f"coordinate-subspace criterion holds but the rank test fails for n={failed[0]}"
        )

    if config.analyses.oracle:
        with _stage("oracle"):
            for n in order.verdicts:
                ov = invariance_oracle(spectra, n, grid, config.oracle_tol)
                report.oracle[n] = ov
                if ov.invariant != order.verdicts[n].invariant:
                    report.warnings.append(
                        f"n={n}: rank test says {'invariant' if order.verdicts[n].invariant else 'not invariant'} "
                        f"but the projection oracle has max residual {ov.max_residual:.3e} "
                        f"at cell {ov.worst_index}"
                    )

    if config.analyses.support_bounds:
        with _stage("support"):
            for n in report.invariant_ns:
                if n > grid.K:
                    report.caveats.append(
                        f"zero-set bound for n={n} skipped: interval [0, {n}) exceeds the band [-{grid.K}, {grid.K})"
                    )
                    continue
                budget = zero_set_bound_check(spectra, n, 0, grid, tol)
                report.support.append(budget)
                if not budget.passes:
                    report.warnings.append(f"n={n}: measured zero set falls below the rank-level bound")

    if config.analyses.frames:
        with _stage("frames"):
            if all(not np.any(s.values) for s in spectra):
                report.caveats.append("frame bounds skipped: trivial space")
            else:
                report.frames = frame_bounds(spectra, tol)
                for n in report.invariant_ns:
                    cf = cutoff_frame_check(spectra, n, tol)
                    report.cutoff_frames[n] = cf
                    if not cf.passes:
                        report.warnings.append(f"n={n}: cutoff frame bounds exceed the original bounds")

    report.caveats.extend(_discretization_caveats(report))
    for w in report.warnings:
        log.warning(w)
    return report


def _discretization_caveats(report: InvarianceReport) -> list[str]:
    grid = report.config.grid
    out = [
        "almost-everywhere statements are checked at every evaluated grid cell; null-set behavior is not represented",
        f"essential inf/sup over frequency are taken as min/max over {grid.M} cells",
        f"zero-set measurements carry a grid slack of 2n/M (n/{grid.M // 2} per n)",
    ]
    for j, t in enumerate(report.tail_energies):
        if t is None:
            out.append(f"generator {j}: truncation tail energy unknown for raw samples")
        elif t > 0:
            out.append(f"generator {j}: energy outside [-{grid.K}, {grid.K}) estimated at {t:.3e}")
    return out
