"""Generator Fourier transforms, exact (piecewise-constant) or sampled on a frequency grid.

A generator's transform is evaluated on the lattice ``omega_i + k`` where
``omega_i`` runs over ``M`` points of the base window ``[0, 1)`` and ``k``
over the fiber offsets ``-K .. K-1``.  Sampled values are stored as a
``(2K, M)`` array indexed ``[k + K, i]`` so that ``values[:, i]`` is the
fiber at ``omega_i`` and ``values.ravel()`` is ordered by frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import GridError, SpectrumError

DEFAULT_FIBER_HALF_WIDTH = 16
DEFAULT_DAUBECHIES_DEPTH = 20


@dataclass(frozen=True)
class FrequencyGrid:
    """``M`` samples per unit frequency, fibers truncated to ``k in [-K, K)``.

    With ``midpoint=True`` the base points are cell midpoints ``(i + 1/2)/M``,
    otherwise the left edges ``i/M``.
    """

    samples_per_unit: int
    fiber_half_width: int = DEFAULT_FIBER_HALF_WIDTH
    midpoint: bool = True

    def __post_init__(self):
        if int(self.samples_per_unit) != self.samples_per_unit or self.samples_per_unit < 2:
            raise GridError(f"samples_per_unit must be an integer >= 2, got {self.samples_per_unit!r}")
        if int(self.fiber_half_width) != self.fiber_half_width or self.fiber_half_width < 1:
            raise GridError(f"fiber_half_width must be an integer >= 1, got {self.fiber_half_width!r}")

    @property
    def M(self) -> int:
        return self.samples_per_unit

    @property
    def K(self) -> int:
        return self.fiber_half_width

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.K, self.M)

    @property
    def base(self) -> np.ndarray:
        """Base frequencies ``omega_i`` in ``[0, 1)``."""
        shift = 0.5 if self.midpoint else 0.0
        return (np.arange(self.M) + shift) / self.M

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.K, self.K)

    @property
    def frequencies(self) -> np.ndarray:
        """All evaluated frequencies, shape ``(2K, M)``, entry ``[k + K, i] = omega_i + k``."""
        return self.offsets[:, None] + self.base[None, :]

    def widened(self, factor: int = 2) -> "FrequencyGrid":
        return FrequencyGrid(self.M, factor * self.K, self.midpoint)


# --------------------------------------------------------------------------
# exact piecewise-constant spectra


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise SpectrumError(f"invalid rational {x!r}")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SpectrumError(f"invalid rational {x!r}") from exc
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise SpectrumError(f"non-finite breakpoint {x!r}")
        return Fraction(float(x))
    raise SpectrumError(f"invalid rational {x!r}")


def _to_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise SpectrumError(f"complex value must be a [re, im] pair, got {v!r}")
        v = complex(float(v[0]), float(v[1]))
    try:
        z = complex(v)
    except (TypeError, ValueError) as exc:
        raise SpectrumError(f"invalid value {v!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SpectrumError(f"non-finite value {v!r}")
    return z


@dataclass(frozen=True)
class PiecewiseConstantSpectrum:
    """Finite sum of ``value * chi_[a, b)`` over disjoint rational intervals.

    Stored in canonical form: intervals sorted, zero-valued intervals dropped,
    touching intervals with equal values merged.  Zero outside the intervals.
    """

    intervals: tuple[tuple[Fraction, Fraction, complex], ...] = ()

    def __call__(self, omega) -> complex:
        w = _to_fraction(omega) if not isinstance(omega, float) else Fraction(omega)
        for a, b, v in self.intervals:
            if a <= w < b:
                return v
        return 0j

    @property
    def denominator(self) -> int:
        """Least common denominator of all breakpoints (1 for the zero spectrum)."""
        dens = [x.denominator for a, b, _ in self.intervals for x in (a, b)]
        return reduce(math.lcm, dens, 1)

    @property
    def support_bounds(self) -> tuple[Fraction, Fraction] | None:
        if not self.intervals:
            return None
        return self.intervals[0][0], self.intervals[-1][1]

    def breakpoints_and_values(self) -> tuple[list[Fraction], list[complex]]:
        """Strictly increasing breakpoints with gap intervals filled by zeros."""
        if not self.intervals:
            return [], []
        bps = [self.intervals[0][0]]
        vals: list[complex] = []
        for a, b, v in self.intervals:
            if a != bps[-1]:
                bps.append(a)
                vals.append(0j)
            bps.append(b)
            vals.append(v)
        return bps, vals

    def scaled(self, c: complex) -> "PiecewiseConstantSpectrum":
        bps, vals = self.breakpoints_and_values()
        return make_piecewise_constant(bps, [c * v for v in vals]) if bps else self


def make_piecewise_constant(breakpoints: Sequence, values: Sequence) -> PiecewiseConstantSpectrum:
    """Build a canonical piecewise-constant spectrum.

    ``values[j]`` is taken on ``[breakpoints[j], breakpoints[j+1])``.  Breakpoints
    may be ints, Fractions or ``"p/q"`` strings; values may be complex numbers or
    ``[re, im]`` pairs.
    """
    bps = [_to_fraction(b) for b in breakpoints]
    vals = [_to_complex(v) for v in values]
    if len(bps) == 0 and len(vals) == 0:
        return PiecewiseConstantSpectrum(())
    if len(vals) != len(bps) - 1:
        raise SpectrumError(
            f"expected {max(len(bps) - 1, 0)} values for {len(bps)} breakpoints, got {len(vals)}"
        )
    for left, right in zip(bps, bps[1:]):
        if not left < right:
            raise SpectrumError(f"breakpoints must be strictly increasing: {left} >= {right}")

    merged: list[tuple[Fraction, Fraction, complex]] = []
    for a, b, v in zip(bps, bps[1:], vals):
        if v == 0:
            continue
        if merged and merged[-1][1] == a and merged[-1][2] == v:
            merged[-1] = (merged[-1][0], b, v)
        else:
            merged.append((a, b, v))
    return PiecewiseConstantSpectrum(tuple(merged))


def indicator(*intervals) -> PiecewiseConstantSpectrum:
    """Characteristic function of a union of disjoint half-open intervals ``(a, b)``."""
    pieces = sorted((_to_fraction(a), _to_fraction(b)) for a, b in intervals)
    bps: list[Fraction] = []
    vals: list[complex] = []
    for a, b in pieces:
        if bps and a < bps[-1]:
            raise SpectrumError(f"overlapping intervals at {a}")
        if bps and a > bps[-1]:
            bps.append(a)
            vals.append(0j)
        elif not bps:
            bps.append(a)
        bps.append(b)
        vals.append(1 + 0j)
    return make_piecewise_constant(bps, vals)


def support_measure(spec: PiecewiseConstantSpectrum, a, b) -> Fraction:
    """Exact Lebesgue measure of ``{w in [a, b) : spec(w) != 0}``."""
    a, b = _to_fraction(a), _to_fraction(b)
    if not a < b:
        raise SpectrumError(f"empty interval [{a}, {b})")
    total = Fraction(0)
    for lo, hi, _ in spec.intervals:
        total += max(Fraction(0), min(b, hi) - max(a, lo))
    return total


# --------------------------------------------------------------------------
# generator families


def daubechies_filter(taps: int) -> np.ndarray:
    """Orthonormal minimum-phase Daubechies lowpass filter with ``taps`` coefficients.

    Normalized so the coefficients sum to ``sqrt(2)``; ``taps=2`` is Haar.
    """
    if taps < 2 or taps % 2:
        raise SpectrumError(f"Daubechies filters have an even number of taps >= 2, got {taps}")
    p = taps // 2
    if p == 1:
        return np.array([1.0, 1.0]) / np.sqrt(2.0)
    # roots of P(y) = sum_k C(p-1+k, k) y^k, each mapped to the z-root outside the unit disk;
    # reversing the coefficients at the end reflects them inside (minimum phase)
    poly = [math.comb(p - 1 + k, k) for k in range(p)][::-1]
    yroots = np.roots(poly)
    q = np.poly1d([1.0])
    for y in yroots:
        part = 2 * np.sqrt(y * (y - 1))
        const = 1 - 2 * y
        z = const + part
        if abs(z) < 1:
            z = const - part
        q = q * np.poly1d([1.0, -z])
    h = np.poly1d([1.0, 1.0]) ** p * np.real(q)
    h = h / np.sum(h.c) * np.sqrt(2.0)
    return h.c[::-1].copy()


@dataclass(frozen=True)
class PiecewiseConstant:
    spectrum: PiecewiseConstantSpectrum
    type: str = field(default="piecewise_constant", init=False)


@dataclass(frozen=True)
class BSpline:
    """Box function convolved with itself ``order`` times (order 0 is Haar)."""

    order: int = 0
    type: str = field(default="bspline", init=False)

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 0:
            raise SpectrumError(f"bspline order must be a nonnegative integer, got {self.order!r}")


@dataclass(frozen=True)
class Daubechies:
    """Scaling function of a two-scale filter via the truncated infinite product."""

    coefficients: tuple[float, ...]
    depth: int = DEFAULT_DAUBECHIES_DEPTH
    type: str = field(default="daubechies", init=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.coefficients:
            raise SpectrumError("daubechies filter has no coefficients")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise SpectrumError("daubechies filter has non-finite coefficients")
        if abs(sum(self.coefficients) - math.sqrt(2)) > 1e-12:
            raise SpectrumError(
                f"daubechies coefficients must sum to sqrt(2), got {sum(self.coefficients)!r}"
            )
        if int(self.depth) != self.depth or self.depth < 1:
            raise SpectrumError(f"daubechies product depth must be >= 1, got {self.depth!r}")

    @classmethod
    def standard(cls, taps: int, depth: int = DEFAULT_DAUBECHIES_DEPTH) -> "Daubechies":
        return cls(tuple(daubechies_filter(taps)), depth)


@dataclass(frozen=True)
class Gaussian:
    """``phi_hat(w) = exp(-pi * width**2 * w**2)``."""

    width: float = 1.0
    type: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not (math.isfinite(self.width) and self.width > 0):
            raise SpectrumError(f"gaussian width must be positive, got {self.width!r}")


@dataclass(frozen=True, eq=False)
class Samples:
    """Raw transform values on a declared grid, flat in frequency order (length ``2K*M``)."""

    grid: FrequencyGrid
    values: np.ndarray
    type: str = field(default="samples", init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).ravel()
        if vals.size != 2 * self.grid.K * self.grid.M:
            raise SpectrumError(
                f"samples must have length 2K*M = {2 * self.grid.K * self.grid.M}, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise SpectrumError("samples contain non-finite entries")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        return (
            isinstance(other, Samples)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


GeneratorSpec = Union[PiecewiseConstant, BSpline, Daubechies, Gaussian, Samples]


@dataclass(frozen=True, eq=False)
class SampledSpectrum:
    """Transform values on a grid; ``values[k + K, i] = phi_hat(omega_i + k)``."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex, copy=True)
        if vals.shape != self.grid.shape:
            raise GridError(f"values have shape {vals.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise SpectrumError("sampled spectrum contains non-finite entries")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def at(self, i: int, k: int) -> complex:
        return complex(self.values[k + self.grid.K, i])

    def norm_squared(self) -> float:
        """Riemann-sum approximation of the squared L2 norm."""
        return float(np.sum(np.abs(self.values) ** 2) / self.grid.M)

    def scaled(self, c: complex) -> "SampledSpectrum":
        return SampledSpectrum(self.grid, c * self.values)

    def __add__(self, other: "SampledSpectrum") -> "SampledSpectrum":
        if other.grid != self.grid:
            raise GridError("cannot add spectra sampled on different grids")
        return SampledSpectrum(self.grid, self.values + other.values)

    def __eq__(self, other):
        return (
            isinstance(other, SampledSpectrum)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _sample_piecewise(spec: PiecewiseConstantSpectrum, grid: FrequencyGrid) -> np.ndarray:
    M, K = grid.M, grid.K
    if M % spec.denominator:
        raise GridError(
            f"grid with M={M} is not aligned to breakpoint denominator {spec.denominator}"
        )
    flat = np.zeros(2 * K * M, dtype=complex)
    lo_cell, hi_cell = -K * M, K * M
    for a, b, v in spec.intervals:
        # cell g covers [g/M, (g+1)/M); aligned breakpoints make a*M, b*M integers
        start = max(int(a * M), lo_cell)
        stop = min(int(b * M), hi_cell)
        if start < stop:
            flat[start - lo_cell : stop - lo_cell] = v
    return flat.reshape(grid.shape)


def _daubechies_product(coefficients: Sequence[float], depth: int, freqs: np.ndarray) -> np.ndarray:
    h = np.asarray(coefficients, dtype=float)
    taps = np.arange(h.size)
    out = np.ones(freqs.shape, dtype=complex)
    with np.errstate(all="raise"):
        try:
            for j in range(1, depth + 1):
                xi = freqs / 2.0**j
                phase = np.exp(-2j * np.pi * np.multiply.outer(xi, taps))
                out = out * (phase @ h) / np.sqrt(2.0)
        except FloatingPointError as exc:
            raise SpectrumError(f"overflow in Daubechies product: {exc}") from exc
    return out


def evaluate(spec: GeneratorSpec | PiecewiseConstantSpectrum, grid: FrequencyGrid) -> SampledSpectrum:
    """Sample a generator's transform at every ``omega_i + k`` of ``grid``."""
    if isinstance(spec, PiecewiseConstantSpectrum):
        spec = PiecewiseConstant(spec)
    freqs = grid.frequencies
    if isinstance(spec, PiecewiseConstant):
        values = _sample_piecewise(spec.spectrum, grid)
    elif isinstance(spec, BSpline):
        values = (np.exp(-1j * np.pi * freqs) * np.sinc(freqs)) ** (spec.order + 1)
    elif isinstance(spec, Daubechies):
        values = _daubechies_product(spec.coefficients, spec.depth, freqs)
    elif isinstance(spec, Gaussian):
        values = np.exp(-np.pi * spec.width**2 * freqs**2).astype(complex)
    elif isinstance(spec, Samples):
        if spec.grid != grid:
            raise GridError(f"samples were declared on {spec.grid}, requested {grid}")
        values = spec.values.reshape(grid.shape)
    else:
        raise SpectrumError(f"unknown generator spec {spec!r}")
    if not np.all(np.isfinite(values)):
        raise SpectrumError(f"non-finite values evaluating {type(spec).__name__}")
    return SampledSpectrum(grid, values)


def tail_energy(spec: GeneratorSpec | PiecewiseConstantSpectrum, grid: FrequencyGrid) -> float | None:
    """Energy discarded by fiber truncation, estimated on the grid widened to ``2K``.

    Returns ``None`` for raw samples, which cannot be re-evaluated.
    """
    if isinstance(spec, PiecewiseConstantSpectrum):
        spec = PiecewiseConstant(spec)
    if isinstance(spec, Samples):
        return None
    wide = evaluate(spec, grid.widened(2)).values
    K = grid.K
    outer = np.concatenate([wide[:K], wide[3 * K :]])
    return float(np.sum(np.abs(outer) ** 2) / grid.M)


# --------------------------------------------------------------------------
# JSON form: {"type": ..., params}; rationals as "p/q", complex as [re, im]


def _fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def spec_to_json(spec: GeneratorSpec) -> dict:
    if isinstance(spec, PiecewiseConstantSpectrum):
        spec = PiecewiseConstant(spec)
    if isinstance(spec, PiecewiseConstant):
        bps, vals = spec.spectrum.breakpoints_and_values()
        return {
            "type": spec.type,
            "breakpoints": [_fraction_str(b) for b in bps],
            "values": [_complex_pair(v) for v in vals],
        }
    if isinstance(spec, BSpline):
        return {"type": spec.type, "order": spec.order}
    if isinstance(spec, Daubechies):
        return {"type": spec.type, "coefficients": list(spec.coefficients), "depth": spec.depth}
    if isinstance(spec, Gaussian):
        return {"type": spec.type, "width": spec.width}
    if isinstance(spec, Samples):
        return {
            "type": spec.type,
            "grid": {"M": spec.grid.M, "K": spec.grid.K, "midpoint": spec.grid.midpoint},
            "values": [_complex_pair(v) for v in spec.values],
        }
    raise SpectrumError(f"unknown generator spec {spec!r}")


def spec_from_json(obj: dict) -> GeneratorSpec:
    if not isinstance(obj, dict):
        raise SpectrumError(f"generator must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("type")
    try:
        if kind == "piecewise_constant":
            return PiecewiseConstant(make_piecewise_constant(obj["breakpoints"], obj["values"]))
        if kind == "bspline":
            return BSpline(obj.get("order", 0))
        if kind == "daubechies":
            if "coefficients" in obj:
                return Daubechies(tuple(obj["coefficients"]), obj.get("depth", DEFAULT_DAUBECHIES_DEPTH))
            return Daubechies.standard(int(obj["taps"]), obj.get("depth", DEFAULT_DAUBECHIES_DEPTH))
        if kind == "gaussian":
            return Gaussian(float(obj.get("width", 1.0)))
        if kind == "samples":
            g = obj["grid"]
            grid = FrequencyGrid(g["M"], g["K"], g.get("midpoint", True))
            return Samples(grid, np.array([_to_complex(v) for v in obj["values"]]))
    except KeyError as exc:
        raise SpectrumError(f"generator of type {kind!r} is missing field {exc.args[0]!r}") from exc
    raise SpectrumError(f"unknown generator type {kind!r}")
