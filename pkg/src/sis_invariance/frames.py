"""Frame bounds of integer-translate systems, read off the Gramian spectrum."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisViolation, SISError
from .fiber import DEFAULT_REL_TOL, ZERO_FLOOR, common_grid, gramian_field
from .invariance import cutoffs, rank_sum_test
from .spectrum import SampledSpectrum


@dataclass(frozen=True)
class FrameBounds:
    A: float
    B: float
    A_index: int  # base cell attaining A
    B_index: int
    parseval: bool

    def as_dict(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "A_omega_index": self.A_index,
            "B_omega_index": self.B_index,
            "parseval": self.parseval,
        }


@dataclass(frozen=True)
class CutoffFrameReport:
    n: int
    original: FrameBounds
    per_k: list[FrameBounds | None]  # None marks a trivial U_k
    union: FrameBounds
    tolerance: float
    per_k_within: bool
    union_within: bool

    @property
    def passes(self) -> bool:
        return self.per_k_within and self.union_within

    def as_dict(self) -> dict:
        out = self.original.as_dict()
        out.update(
            n=self.n,
            per_k=[
                {"k": k, "trivial": True} if fb is None else {"k": k, "trivial": False, **fb.as_dict()}
                for k, fb in enumerate(self.per_k)
            ],
            union=self.union.as_dict(),
            tolerance=self.tolerance,
            passes=self.passes,
        )
        return out


def _is_zero(s: SampledSpectrum) -> bool:
    return not np.any(s.values)


def frame_bounds(phis: Sequence[SampledSpectrum], rel_tol: float = DEFAULT_REL_TOL) -> FrameBounds:
    """Optimal frame bounds of the translates of ``phis`` for their closed span.

    ``A`` is the smallest Gramian eigenvalue above the rank threshold over all
    cells, ``B`` the largest eigenvalue; eigenvalues at or below the threshold
    belong to the kernel and are ignored.
    """
    common_grid(phis)
    eigs = gramian_field(phis).eigenvalues()  # ascending, (M, m)
    lam_max = eigs[:, -1]
    if not np.any(lam_max > ZERO_FLOOR):
        raise SISError("trivial space: every generator vanishes on the grid")
    thr = rel_tol * np.maximum(lam_max, ZERO_FLOOR)
    above = np.where(eigs > thr[:, None], eigs, np.inf)
    lowest = above.min(axis=1)
    lowest[lam_max <= ZERO_FLOOR] = np.inf
    a_idx = int(np.argmin(lowest))
    b_idx = int(np.argmax(lam_max))
    A, B = float(lowest[a_idx]), float(lam_max[b_idx])
    parseval = abs(A - 1) <= 10 * rel_tol and abs(B - 1) <= 10 * rel_tol
    return FrameBounds(A, B, a_idx, b_idx, parseval)


def cutoff_frame_check(
    phis: Sequence[SampledSpectrum], n: int, rel_tol: float = DEFAULT_REL_TOL
) -> CutoffFrameReport:
    """Frame bounds of each cutoff family and of their union, compared with the original bounds."""
    verdict = rank_sum_test(phis, n, rel_tol=rel_tol)
    if not verdict.invariant:
        raise HypothesisViolation(
            f"span is not 1/{n}-invariant (first failing cell {verdict.first_failure}); "
            "cutoff frame preservation does not apply"
        )
    original = frame_bounds(phis, rel_tol)
    eps = 10 * rel_tol * original.B
    per_k: list[FrameBounds | None] = []
    union_members: list[SampledSpectrum] = []
    for family in cutoffs(phis, n).families:
        members = [s for s in family if not _is_zero(s)]
        if not members:
            per_k.append(None)
            continue
        per_k.append(frame_bounds(members, rel_tol))
        union_members.extend(members)
    union = frame_bounds(union_members, rel_tol)

    def within(fb: FrameBounds) -> bool:
        return fb.A >= original.A - eps and fb.B <= original.B + eps

    return CutoffFrameReport(
        n=n,
        original=original,
        per_k=per_k,
        union=union,
        tolerance=eps,
        per_k_within=all(within(fb) for fb in per_k if fb is not None),
        union_within=within(union),
    )
