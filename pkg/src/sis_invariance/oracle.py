"""Membership in a shift-invariant space by fiberwise least-squares projection.

A function belongs to the span of the integer translates of ``Phi`` when its
fiber lies in the span of the generator fibers at almost every base frequency.
The projection coefficients are the sampled values of the periodic
multipliers expressing the function through the generators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridError, SISError
from .fiber import FiberMatrix, FiberVector, common_grid, fiber_stack, normalized
from .spectrum import FrequencyGrid, SampledSpectrum

DEFAULT_ORACLE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class OracleVerdict:
    n: int
    invariant: bool
    tol: float
    max_residual: float
    worst_index: int  # smallest base index attaining the max residual
    residuals: np.ndarray  # (M,) max over generators
    coefficients: np.ndarray  # (M, m, m): [i, j] expresses translated phi_j through Phi


@dataclass(frozen=True, eq=False)
class MembershipVerdict:
    n: int
    member: bool
    tol: float
    max_residual: float
    worst: tuple[int, int]  # (residue class r, base index i)
    residuals: np.ndarray  # (n, M)
    coefficients: np.ndarray  # (n, M): multiplier value at omega_i + r


def translate(s: SampledSpectrum, theta: float) -> SampledSpectrum:
    """Transform of ``f(x - theta)``: multiply by ``exp(-2 pi i theta w)``."""
    if theta == 0:
        return s
    return SampledSpectrum(s.grid, s.values * np.exp(-2j * np.pi * theta * s.grid.frequencies))


def fiber_residuals(targets: np.ndarray, bases: np.ndarray, tol: float = DEFAULT_ORACLE_TOL):
    """Relative distance of target fibers from basis column spans, batched over cells.

    ``targets`` has shape ``(M, L, t)`` and ``bases`` ``(M, L, m)``.  Returns
    ``(residuals (M, t), coefficients (M, m, t))``.  Basis columns with norm at
    most ``tol`` times the largest column norm are dropped and the span is
    taken from the singular vectors above ``tol`` times the top singular value.
    Targets with norm at most ``tol`` times the basis scale count as zero.
    """
    targets = np.asarray(targets, dtype=complex)
    bases = np.asarray(bases, dtype=complex)
    if targets.ndim != 3 or bases.ndim != 3 or targets.shape[:2] != bases.shape[:2]:
        raise SISError(f"shape mismatch: targets {targets.shape}, bases {bases.shape}")
    col_norms = np.linalg.norm(bases, axis=1)  # (M, m)
    scale = col_norms.max(axis=1)
    keep = col_norms > tol * scale[:, None]
    B = bases * keep[:, None, :]
    U, S, Vh = np.linalg.svd(B, full_matrices=False)
    active = S > tol * np.maximum(S[:, :1], 0)
    active &= S > 0
    U = U * active[:, None, :]
    proj_coords = np.einsum("mlr,mlt->mrt", U.conj(), targets)  # (M, r, t)
    proj = np.einsum("mlr,mrt->mlt", U, proj_coords)
    t_norm = np.linalg.norm(targets, axis=1)  # (M, t)
    r_norm = np.linalg.norm(targets - proj, axis=1)
    ref = np.where(scale > 0, scale, 1.0)[:, None]
    zero_target = t_norm <= tol * ref
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(zero_target, 0.0, r_norm / np.where(t_norm > 0, t_norm, 1.0))
    rel = np.clip(rel, 0.0, 1.0)
    inv_s = np.where(active, 1.0 / np.where(active, S, 1.0), 0.0)
    coeffs = np.einsum("mrj,mr,mrt->mjt", Vh.conj(), inv_s, proj_coords)
    coeffs = coeffs * ~zero_target[:, None, :]
    return rel, coeffs


def fiber_residual(target, basis, tol: float = DEFAULT_ORACLE_TOL) -> tuple[float, np.ndarray]:
    """Relative residual of one fiber against one fiber matrix, with the projection coefficients."""
    t = target.entries if isinstance(target, FiberVector) else np.asarray(target)
    B = basis.matrix if isinstance(basis, FiberMatrix) else np.asarray(basis)
    if B.ndim == 1:
        B = B[:, None]
    if t.ndim != 1 or B.shape[0] != t.shape[0]:
        raise SISError(f"shape mismatch: target {t.shape}, basis {B.shape}")
    rel, coeffs = fiber_residuals(t[None, :, None], B[None], tol)
    return float(rel[0, 0]), coeffs[0, :, 0]


def invariance_oracle(
    phis: Sequence[SampledSpectrum],
    n: int,
    grid: FrequencyGrid | None = None,
    tol: float = DEFAULT_ORACLE_TOL,
) -> OracleVerdict:
    """Decide ``1/n``-invariance by projecting each ``1/n``-translated generator onto the span."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    g = common_grid(phis)
    if grid is not None and grid != g:
        raise GridError(f"generators are sampled on {g}, requested {grid}")
    phis = normalized(phis)
    basis = fiber_stack(phis)
    moved = fiber_stack([translate(s, 1.0 / n) for s in phis])
    rel, coeffs = fiber_residuals(moved, basis, tol)
    per_cell = rel.max(axis=1)
    worst = int(np.argmax(per_cell))  # argmax returns the first maximal index
    max_res = float(per_cell[worst])
    return OracleVerdict(
        n=n,
        invariant=max_res <= tol,
        tol=tol,
        max_residual=max_res,
        worst_index=worst,
        residuals=per_cell,
        coefficients=np.swapaxes(coeffs, 1, 2),
    )


def refined_membership(
    g: SampledSpectrum,
    f: SampledSpectrum,
    n: int,
    grid: FrequencyGrid | None = None,
    tol: float = DEFAULT_ORACLE_TOL,
) -> MembershipVerdict:
    """Whether ``g`` lies in the closed span of the ``1/n``-translates of ``f``.

    Uses refined fibers ``{phi_hat(w + k n)}`` over the base window ``[0, n)``:
    membership holds iff each refined fiber of ``g`` is a multiple of that of
    ``f``, i.e. ``g_hat = m f_hat`` with ``m`` ``n``-periodic.
    """
    grd = common_grid([g, f])
    if grid is not None and grid != grd:
        raise GridError(f"spectra are sampled on {grd}, requested {grid}")
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if grd.K < n:
        raise GridError(f"fiber half-width K={grd.K} is too small for refined fibers with n={n}")
    g_norm, f_norm = np.sqrt(g.norm_squared()), np.sqrt(f.norm_squared())
    g, f = normalized([g, f])
    residues = grd.offsets % n
    residuals = np.empty((n, grd.M))
    coefficients = np.empty((n, grd.M), dtype=complex)
    for r in range(n):
        rows = residues == r
        # rows with k = r + n*j give omega_i + r + n*j: the refined fiber at base point omega_i + r
        t = g.values[rows].T[:, :, None]
        B = f.values[rows].T[:, :, None]
        rel, coeffs = fiber_residuals(t, B, tol)
        residuals[r] = rel[:, 0]
        coefficients[r] = coeffs[:, 0, 0]
    # multiplier for the caller's unnormalized g and f
    if g_norm > 0 and f_norm > 0:
        coefficients *= g_norm / f_norm
    flat = int(np.argmax(residuals))
    worst = (flat // grd.M, flat % grd.M)
    max_res = float(residuals[worst])
    return MembershipVerdict(
        n=n,
        member=max_res <= tol,
        tol=tol,
        max_residual=max_res,
        worst=worst,
        residuals=residuals,
        coefficients=coefficients,
    )

