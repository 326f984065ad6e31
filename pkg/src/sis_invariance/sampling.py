"""Seeded random piecewise-constant generator families for cross-validation sweeps."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .spectrum import FrequencyGrid, PiecewiseConstantSpectrum, make_piecewise_constant

# small Gaussian-integer-like palette keeps exact linear relations well separated numerically
VALUES = (1, -1, 2, 1j, -1j, 1 + 1j, 0.5, -2)


def _random_free(rng: np.random.Generator, d: int, lo: int, hi: int) -> PiecewiseConstantSpectrum:
    lattice = np.arange(lo * d, hi * d + 1)
    pieces = int(rng.integers(1, 5))
    cuts = np.sort(rng.choice(lattice, size=min(2 * pieces, lattice.size), replace=False))
    bps = [Fraction(int(c), d) for c in cuts]
    vals = [VALUES[rng.integers(len(VALUES))] if j % 2 == 0 else 0 for j in range(len(bps) - 1)]
    return make_piecewise_constant(bps, vals)


def _random_residue(rng: np.random.Generator, d: int, lo: int, hi: int) -> PiecewiseConstantSpectrum:
    # support restricted to unit cells [c, c+1) with c in one residue class mod a random period
    period = int(rng.integers(2, 7))
    r = int(rng.integers(period))
    cells = [c for c in range(lo, hi) if c % period == r]
    chosen = [c for c in cells if rng.random() < 0.7] or cells[:1]
    bps: list[Fraction] = []
    vals: list[complex] = []
    for c in chosen:
        a = Fraction(c) + Fraction(int(rng.integers(0, d)), d) * int(rng.random() < 0.5)
        b = Fraction(c + 1)
        if bps and a > bps[-1]:
            bps.append(a)
            vals.append(0)
        elif not bps:
            bps.append(a)
        bps.append(b)
        vals.append(VALUES[rng.integers(len(VALUES))])
    return make_piecewise_constant(bps, vals)


def random_family(
    rng: np.random.Generator,
    max_generators: int = 3,
    max_denominator: int = 8,
    support: tuple[int, int] = (-4, 4),
) -> list[PiecewiseConstantSpectrum]:
    """1 to ``max_generators`` spectra with breakpoints in ``(1/d)Z``, ``d <= max_denominator``, inside ``support``."""
    lo, hi = support
    m = int(rng.integers(1, max_generators + 1))
    family = []
    for _ in range(m):
        d = int(rng.integers(1, max_denominator + 1))
        if rng.random() < 0.5:
            family.append(_random_residue(rng, d, lo, hi))
        else:
            family.append(_random_free(rng, d, lo, hi))
    return family


def aligned_grid(family, fiber_half_width: int, min_samples: int = 8) -> FrequencyGrid:
    """Smallest grid (at least ``min_samples`` per unit) aligned with every breakpoint."""
    d = math.lcm(*(s.denominator for s in family))
    return FrequencyGrid(d * math.ceil(min_samples / d), fiber_half_width)
