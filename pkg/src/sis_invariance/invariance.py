"""Fractional-shift invariance of finitely generated shift-invariant spaces.

For a fixed ``n`` the frequency line is split into the ``n``-periodic cells
``B_k = union_j [k + n*j, k + 1 + n*j)``.  The span of the generators is
invariant under translation by ``1/n`` exactly when, at almost every base
frequency, the Gramian rank of the generators equals the sum of the Gramian
ranks of their ``B_k`` cutoffs.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GridError, HypothesisViolation, SISError
from .fiber import (
    DEFAULT_REL_TOL,
    ZERO_FLOOR,
    common_grid,
    fiber_stack,
    gram_from_fibers,
    hermitian_eigenvalues,
    normalized,
    ranks_from_eigenvalues,
)
from .spectrum import FrequencyGrid, SampledSpectrum

DEFAULT_N_MAX = 16
THREADS_ENV = "SIS_INVARIANCE_THREADS"


@dataclass(frozen=True, eq=False)
class CutoffSet:
    n: int
    families: list[list[SampledSpectrum]]  # families[k][j] = P_k phi_j


@dataclass(frozen=True, eq=False)
class InvarianceVerdict:
    n: int
    invariant: bool
    rel_tol: float
    ranks: np.ndarray  # (M,) rank of G
    cutoff_ranks: np.ndarray  # (n, M) rank of each cutoff Gramian
    subadditive: bool
    first_failure: int | None  # base index of the first failing cell

    @property
    def rank_sums(self) -> np.ndarray:
        return self.cutoff_ranks.sum(axis=0)

    @property
    def failing_fraction(self) -> float:
        return float(np.mean(self.ranks != self.rank_sums))

    def diagnostic(self) -> dict:
        i = self.first_failure
        if i is None:
            i = int(np.argmax(self.rank_sums - self.ranks))
        return {
            "omega_index": int(i),
            "rank": int(self.ranks[i]),
            "cutoff_rank_sum": int(self.rank_sums[i]),
        }


@dataclass(frozen=True, eq=False)
class OrderResult:
    n_max: int
    verdicts: dict[int, InvarianceVerdict]
    order: int | None  # None when every tested n is invariant
    divisor_consistent: bool
    lcm_consistent: bool
    violations: list[str] = field(default_factory=list)
    ti: bool | None = None

    @property
    def translation_invariant_candidate(self) -> bool:
        return self.order is None

    @property
    def consistent(self) -> bool:
        return self.divisor_consistent and self.lcm_consistent

    @property
    def declared(self) -> int | str:
        return self.order if self.order is not None else f">= {self.n_max}"


@dataclass(frozen=True)
class GeneratorZeroSet:
    generator: int
    zero_measure: float
    passes: bool


@dataclass(frozen=True, eq=False)
class SupportBudget:
    n: int
    interval: tuple[Fraction, Fraction]
    level_measures: np.ndarray  # |E_j|, j = 0..m
    bound: float  # sum_{j<n} (n - j)|E_j|
    slack: float  # 2n/M
    large_n_bound: int | None  # n - m when n > m
    generators: list[GeneratorZeroSet]

    @property
    def passes(self) -> bool:
        return all(g.passes for g in self.generators)


def _check_nk(n: int, k: int) -> None:
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not 0 <= k < n:
        raise ValueError(f"cell index k={k} out of range [0, {n})")


def in_partition(n: int, k: int, omega) -> bool:
    """Whether ``omega`` lies in ``B_k`` for the ``n``-cell partition."""
    _check_nk(n, k)
    return math.floor(omega) % n == k


def partition_mask(n: int, k: int, grid: FrequencyGrid) -> np.ndarray:
    """Boolean ``(2K, M)`` mask of ``B_k`` on the grid; row ``k'`` is constant since ``omega_i in [0, 1)``."""
    _check_nk(n, k)
    rows = (grid.offsets % n) == k
    return np.repeat(rows[:, None], grid.M, axis=1)


def cutoff(s: SampledSpectrum, n: int, k: int) -> SampledSpectrum:
    mask = partition_mask(n, k, s.grid)
    return SampledSpectrum(s.grid, np.where(mask, s.values, 0))


def cutoffs(phis: Sequence[SampledSpectrum], n: int) -> CutoffSet:
    return CutoffSet(n, [[cutoff(s, n, k) for s in phis] for k in range(n)])


def modulation_h(n: int, k: int, omega):
    """Unit-modulus 1-periodic multiplier that agrees with ``exp(-2 pi i omega / n)`` on ``B_k``."""
    _check_nk(n, k)
    w = np.asarray(omega, dtype=float)
    cell = np.floor(w) % n
    acc = np.zeros(w.shape, dtype=complex)
    for j in range(-k, n - k):
        acc = acc + np.exp(2j * np.pi * j / n) * (cell == k + j)
    h = np.exp(-2j * np.pi * w / n) * acc
    return complex(h) if h.ndim == 0 else h


# --------------------------------------------------------------------------
# rank tests


def _stack_normalized(phis: Sequence[SampledSpectrum]) -> np.ndarray:
    if len(phis) == 0:
        raise SISError("need at least one generator")
    return fiber_stack(normalized(phis))


def _rank_sum_arrays(F: np.ndarray, n: int, grid: FrequencyGrid, rel_tol: float):
    eigs = hermitian_eigenvalues(gram_from_fibers(F))
    lam_max = eigs[:, -1]
    ranks = ranks_from_eigenvalues(eigs, rel_tol)
    residues = grid.offsets % n
    cutoff_ranks = np.empty((n, grid.M), dtype=int)
    for k in range(n):
        Fk = F * (residues == k)[None, :, None]
        # cutoff ranks are measured against the scale of the full Gramian at the same cell
        cutoff_ranks[k] = ranks_from_eigenvalues(
            hermitian_eigenvalues(gram_from_fibers(Fk)), rel_tol, scale=lam_max
        )
    return ranks, cutoff_ranks


def rank_sum_test(
    phis: Sequence[SampledSpectrum],
    n: int,
    grid: FrequencyGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> InvarianceVerdict:
    """Decide ``1/n``-invariance by comparing ``rank G`` with the sum of cutoff ranks at every cell."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    g = common_grid(phis)
    if grid is not None and grid != g:
        raise GridError(f"generators are sampled on {g}, requested {grid}")
    ranks, cutoff_ranks = _rank_sum_arrays(_stack_normalized(phis), n, g, rel_tol)
    sums = cutoff_ranks.sum(axis=0)
    failing = np.flatnonzero(ranks != sums)
    return InvarianceVerdict(
        n=n,
        invariant=failing.size == 0,
        rel_tol=rel_tol,
        ranks=ranks,
        cutoff_ranks=cutoff_ranks,
        subadditive=bool(np.all(ranks <= sums)),
        first_failure=int(failing[0]) if failing.size else None,
    )


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def subgroup_violations(invariant: dict[int, bool]) -> tuple[list[str], list[str]]:
    """Divisor and lcm violations among per-n verdicts (n = 1 is always invariant)."""
    tested = dict(invariant)
    tested[1] = True
    n_max = max(tested)
    divisor_bad, lcm_bad = [], []
    passing = sorted(n for n, ok in tested.items() if ok)
    for n in passing:
        for d in range(2, n):
            if n % d == 0 and d in tested and not tested[d]:
                divisor_bad.append(f"invariant for n={n} but not for its divisor {d}")
    for a in passing:
        for b in passing:
            if a < b:
                L = math.lcm(a, b)
                if L <= n_max and L in tested and not tested[L]:
                    lcm_bad.append(f"invariant for n={a} and n={b} but not for lcm {L}")
    return divisor_bad, lcm_bad


def invariance_order(
    phis: Sequence[SampledSpectrum],
    n_max: int = DEFAULT_N_MAX,
    grid: FrequencyGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> OrderResult:
    """Largest ``n <= n_max`` with ``1/n``-invariance, checked against the subgroup structure.

    When every ``n`` passes, no order is declared; translation invariance is then
    decided by :func:`ti_check` and stored on the result.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    g = common_grid(phis)
    if grid is not None and grid != g:
        raise GridError(f"generators are sampled on {g}, requested {grid}")
    ns = list(range(2, n_max + 1))
    test = lambda n: rank_sum_test(phis, n, g, rel_tol)  # noqa: E731
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(test, ns))
    else:
        results = [test(n) for n in ns]
    verdicts = dict(zip(ns, results))

    divisor_bad, lcm_bad = subgroup_violations({n: v.invariant for n, v in verdicts.items()})
    passing = [n for n in ns if verdicts[n].invariant]
    if len(passing) == len(ns):
        order, ti = None, ti_check(phis, g, rel_tol)
    else:
        order, ti = (max(passing) if passing else 1), None
    return OrderResult(
        n_max=n_max,
        verdicts=verdicts,
        order=order,
        divisor_consistent=not divisor_bad,
        lcm_consistent=not lcm_bad,
        violations=divisor_bad + lcm_bad,
        ti=ti,
    )


def active_rows(F: np.ndarray, lam_max: np.ndarray, rel_tol: float) -> np.ndarray:
    """Per-cell count of fiber coordinates carrying energy above the rank threshold."""
    row_energy = np.sum(np.abs(F) ** 2, axis=-1)
    thr = rel_tol * np.maximum(lam_max, ZERO_FLOOR)
    return np.where(lam_max > ZERO_FLOOR, np.sum(row_energy > thr[:, None], axis=-1), 0)


def ti_check(
    phis: Sequence[SampledSpectrum],
    grid: FrequencyGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> bool:
    """True when every fiber space is a coordinate subspace (rank equals active row count)."""
    common_grid(phis)
    F = _stack_normalized(phis)
    eigs = hermitian_eigenvalues(gram_from_fibers(F))
    ranks = ranks_from_eigenvalues(eigs, rel_tol)
    return bool(np.all(ranks == active_rows(F, eigs[:, -1], rel_tol)))


def residue_support_profile(
    phi: SampledSpectrum | Sequence[SampledSpectrum], n: int, rel_tol: float = DEFAULT_REL_TOL
) -> np.ndarray:
    """Per-cell count of residue classes mod ``n`` occupied by a single generator's fiber.

    A class is occupied when its share of the fiber energy exceeds ``rel_tol``.
    """
    if not isinstance(phi, SampledSpectrum):
        if len(phi) != 1:
            raise SISError(f"residue profile needs exactly one generator, got {len(phi)}")
        phi = phi[0]
    energy = np.abs(phi.values) ** 2  # (2K, M)
    total = energy.sum(axis=0)
    residues = phi.grid.offsets % n
    per_class = np.stack([energy[residues == r].sum(axis=0) for r in range(n)])
    thr = rel_tol * np.maximum(total, ZERO_FLOOR)
    return np.where(total > ZERO_FLOOR, np.sum(per_class > thr, axis=0), 0)


# --------------------------------------------------------------------------
# support consequences


def rank_level_sets(
    phis: Sequence[SampledSpectrum],
    grid: FrequencyGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> np.ndarray:
    """``|E_j|`` for ``j = 0..m``: fraction of base cells where ``rank G = j``."""
    g = common_grid(phis)
    F = _stack_normalized(phis)
    ranks = ranks_from_eigenvalues(hermitian_eigenvalues(gram_from_fibers(F)), rel_tol)
    return np.bincount(ranks, minlength=len(phis) + 1) / g.M


def zero_set_measure(s: SampledSpectrum, start, length: int, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Grid measure of ``{w in [start, start + length) : |phi_hat(w)| <= rel_tol * max|phi_hat|}``."""
    grid = s.grid
    a = Fraction(start)
    lo = a * grid.M
    if lo.denominator != 1:
        raise GridError(f"interval start {a} is not on the grid with M={grid.M}")
    lo = int(lo) + grid.K * grid.M
    hi = lo + length * grid.M
    if lo < 0 or hi > 2 * grid.K * grid.M:
        raise GridError(
            f"interval [{a}, {a + length}) leaves the evaluated band [-{grid.K}, {grid.K})"
        )
    mag = np.abs(s.values.ravel())
    tol = rel_tol * mag.max(initial=0.0)
    return float(np.count_nonzero(mag[lo:hi] <= tol) / grid.M)


def zero_set_bound_check(
    phis: Sequence[SampledSpectrum],
    n: int,
    start=0,
    grid: FrequencyGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> SupportBudget:
    """Compare each generator's zero set on ``[start, start + n)`` with the rank-level bound.

    Only meaningful for ``1/n``-invariant spans; anything else is refused.
    """
    g = common_grid(phis)
    verdict = rank_sum_test(phis, n, g, rel_tol)
    if not verdict.invariant:
        raise HypothesisViolation(
            f"span is not 1/{n}-invariant (rank {verdict.diagnostic()['rank']} vs cutoff sum "
            f"{verdict.diagnostic()['cutoff_rank_sum']} at cell {verdict.first_failure}); "
            "the zero-set bound does not apply"
        )
    m = len(phis)
    levels = np.bincount(verdict.ranks, minlength=m + 1) / g.M
    bound = float(sum((n - j) * levels[j] for j in range(min(n, m + 1))))
    slack = 2 * n / g.M
    gens = []
    for h, s in enumerate(phis):
        z = zero_set_measure(s, start, n, rel_tol)
        gens.append(GeneratorZeroSet(h, z, z >= bound - slack))
    a = Fraction(start)
    return SupportBudget(
        n=n,
        interval=(a, a + n),
        level_measures=levels,
        bound=bound,
        slack=slack,
        large_n_bound=n - m if n > m else None,
        generators=gens,
    )
