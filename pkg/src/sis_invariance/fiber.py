"""Fibers, fiber matrices, Gramian fields and numerical ranks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridError, SISError
from .spectrum import FrequencyGrid, SampledSpectrum

DEFAULT_REL_TOL = 1e-8
ZERO_FLOOR = 1e-300
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FiberVector:
    index: int
    entries: np.ndarray  # length 2K, entry [k + K] = phi_hat(omega_i + k)


@dataclass(frozen=True, eq=False)
class FiberMatrix:
    index: int
    matrix: np.ndarray  # (2K, m), column j is the fiber of generator j


@dataclass(frozen=True, eq=False)
class GramianField:
    grid: FrequencyGrid
    matrices: np.ndarray  # (M, m, m)

    @property
    def m(self) -> int:
        return self.matrices.shape[-1]

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues per cell, shape ``(M, m)``."""
        return hermitian_eigenvalues(self.matrices)


@dataclass(frozen=True, eq=False)
class RankProfile:
    grid: FrequencyGrid
    ranks: np.ndarray  # (M,) int
    rel_tol: float


def common_grid(phis: Sequence[SampledSpectrum]) -> FrequencyGrid:
    if len(phis) == 0:
        raise SISError("need at least one generator")
    grid = phis[0].grid
    for s in phis[1:]:
        if s.grid != grid:
            raise GridError(f"generators sampled on different grids: {grid} vs {s.grid}")
    return grid


def fiber(s: SampledSpectrum, i: int) -> FiberVector:
    if not 0 <= i < s.grid.M:
        raise IndexError(f"base index {i} out of range [0, {s.grid.M})")
    return FiberVector(i, s.values[:, i].copy())


def fiber_matrix(phis: Sequence[SampledSpectrum], i: int) -> FiberMatrix:
    grid = common_grid(phis)
    if not 0 <= i < grid.M:
        raise IndexError(f"base index {i} out of range [0, {grid.M})")
    return FiberMatrix(i, np.stack([s.values[:, i] for s in phis], axis=1))


def fiber_stack(phis: Sequence[SampledSpectrum]) -> np.ndarray:
    """All fiber matrices at once, shape ``(M, 2K, m)``."""
    common_grid(phis)
    return np.stack([s.values.T for s in phis], axis=2)


def normalized(phis: Sequence[SampledSpectrum]) -> list[SampledSpectrum]:
    """Rescale each nonzero generator to unit grid norm.

    Column scaling leaves every fiber span unchanged, so rank decisions made on
    the rescaled family do not depend on the relative size of the generators.
    """
    out = []
    for s in phis:
        nrm = np.sqrt(s.norm_squared())
        out.append(s.scaled(1.0 / nrm) if nrm > 0 else s)
    return out


def gram_from_fibers(F: np.ndarray) -> np.ndarray:
    """``G[..., i, j] = sum_k F[..., k, i] * conj(F[..., k, j])``."""
    return np.einsum("...ki,...kj->...ij", F, F.conj())


def gramian_field(phis: Sequence[SampledSpectrum], grid: FrequencyGrid | None = None) -> GramianField:
    g = common_grid(phis)
    if grid is not None and grid != g:
        raise GridError(f"generators are sampled on {g}, requested {grid}")
    return GramianField(g, gram_from_fibers(fiber_stack(phis)))


def hermitian_eigenvalues(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    return np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2).conj()))


def _check_hermitian(A: np.ndarray) -> None:
    dev = np.abs(A - np.swapaxes(A, -1, -2).conj())
    scale = np.max(np.abs(A), initial=0.0)
    if dev.size and dev.max() > HERMITIAN_TOL * max(scale, 1.0):
        raise SISError(f"matrix is not Hermitian (deviation {dev.max():.3e})")


def rank_threshold(lam_max, rel_tol: float):
    return rel_tol * np.maximum(lam_max, ZERO_FLOOR)


def ranks_from_eigenvalues(eigs: np.ndarray, rel_tol: float, scale=None) -> np.ndarray:
    """Count eigenvalues above ``rel_tol * max(scale, floor)``.

    ``scale`` defaults to each matrix's own largest eigenvalue.  Matrices whose
    scale does not exceed the floor have rank 0.
    """
    eigs = np.asarray(eigs)
    lam_max = eigs[..., -1] if scale is None else np.asarray(scale)
    thr = rank_threshold(lam_max, rel_tol)
    r = np.sum(eigs > thr[..., None], axis=-1)
    return np.where(lam_max > ZERO_FLOOR, r, 0)


def numerical_rank(A, rel_tol: float = DEFAULT_REL_TOL, scale: float | None = None) -> int:
    """Rank of a Hermitian PSD matrix by relative eigenvalue threshold."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape[0] != A.shape[1]:
        raise SISError(f"expected a square matrix, got shape {A.shape}")
    _check_hermitian(A)
    return int(ranks_from_eigenvalues(hermitian_eigenvalues(A), rel_tol, scale))


def batched_ranks(G: np.ndarray, rel_tol: float = DEFAULT_REL_TOL, scale=None) -> np.ndarray:
    _check_hermitian(G)
    return ranks_from_eigenvalues(hermitian_eigenvalues(G), rel_tol, scale)


def dimension_function(
    phis: Sequence[SampledSpectrum],
    grid: FrequencyGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> RankProfile:
    """Per-cell dimension of the fiber space, computed as the Gramian rank."""
    field = gramian_field(normalized(phis), grid)
    return RankProfile(field.grid, batched_ranks(field.matrices, rel_tol), rel_tol)
