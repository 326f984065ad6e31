import cmath
from fractions import Fraction

import numpy as np
import pytest

from sis_invariance.errors import HypothesisViolation, SISError
from sis_invariance.invariance import (
    cutoff,
    cutoffs,
    in_partition,
    invariance_order,
    modulation_h,
    partition_mask,
    rank_level_sets,
    rank_sum_test,
    residue_support_profile,
    subgroup_violations,
    ti_check,
    zero_set_bound_check,
)
from sis_invariance.oracle import invariance_oracle
from sis_invariance.sampling import aligned_grid, random_family
from sis_invariance.spectrum import BSpline, FrequencyGrid, SampledSpectrum, evaluate, indicator, support_measure

from conftest import sampled
from oracles import exact_invariant, exact_rank_sum

TWO_CELLS = ((0, 1), (2, 3))


@pytest.mark.parametrize(
    "n, k, omega, expected",
    [
        (2, 0, 0.5, True),
        (2, 0, 1.5, False),
        (3, 2, 5.5, True),
        (3, 2, -0.5, True),  # [-1, 0) = [2, 3) - 3
        (4, 0, 4.0, True),
        (4, 3, 4.0, False),
        (2, 1, Fraction(7, 2), True),
    ],
)
def test_in_partition(n, k, omega, expected):
    assert in_partition(n, k, omega) is expected


def test_in_partition_rejects_bad_cell():
    with pytest.raises(ValueError):
        in_partition(3, 3, 0.5)


@pytest.mark.parametrize("n", range(1, 17))
def test_partition_masks_agree_with_membership(n, grid):
    freqs = grid.frequencies
    for k in range(n):
        mask = partition_mask(n, k, grid)
        for kk in (0, 5, 31):
            assert mask[kk, 0] == in_partition(n, k, float(freqs[kk, 0]))


@pytest.mark.parametrize(
    "intervals, n, k, expected",
    [
        (((0, 2),), 2, 1, ((1, 2),)),
        (TWO_CELLS, 2, 0, TWO_CELLS),
        (TWO_CELLS, 4, 2, ((2, 3),)),
        (TWO_CELLS, 4, 1, None),
    ],
)
def test_cutoff_examples(intervals, n, k, expected):
    out = cutoff(sampled(*intervals), n, k)
    want = np.zeros(out.grid.shape) if expected is None else sampled(*expected).values
    np.testing.assert_array_equal(out.values, want)


def test_cutoffs_sum_to_original():
    s = evaluate(BSpline(1), FrequencyGrid(64, 8))
    for n in (2, 3, 5):
        fam = cutoffs([s], n).families
        total = sum(f[0].values for f in fam)
        np.testing.assert_array_equal(total, s.values)


@pytest.mark.parametrize(
    "intervals, n, invariant",
    [
        (TWO_CELLS, 2, True),
        (TWO_CELLS, 4, False),
        (TWO_CELLS, 3, False),
        (((0, 1),), 5, True),
        (((0, 2),), 2, False),
    ],
)
def test_rank_sum_examples_against_exact_fiber_algebra(intervals, n, invariant):
    spec = indicator(*intervals)
    v = rank_sum_test([sampled(*intervals)], n)
    assert v.invariant is invariant
    assert exact_invariant([spec], n, M=8, K=4) is invariant


def test_rank_sum_two_cells_diagnostics():
    v = rank_sum_test([sampled(*TWO_CELLS)], 4)
    assert v.first_failure == 0
    assert v.diagnostic() == {"omega_index": 0, "rank": 1, "cutoff_rank_sum": 2}
    assert v.subadditive
    assert exact_rank_sum([indicator(*TWO_CELLS)], 4, Fraction(1, 512), 16) == (1, 2)


def test_rank_sum_haar_not_invariant():
    s = evaluate(BSpline(0), FrequencyGrid(256, 16))
    v = rank_sum_test([s], 2)
    assert not v.invariant
    res = invariance_oracle([s], 2).residuals
    # near w = 0 the fiber is almost e_0, so the residual is small but still far above tolerance
    assert res[0] > 1e-3
    assert res[128] > 0.1  # w = 1/2 + 1/512


def test_rank_sum_trivial_for_n_one():
    assert rank_sum_test([evaluate(BSpline(0), FrequencyGrid(32, 4))], 1).invariant


def test_rank_sum_matches_exact_oracle_on_random_families():
    rng = np.random.default_rng(7)
    for _ in range(12):
        family = random_family(rng, max_denominator=4)
        grid = aligned_grid(family, 4)
        phis = [evaluate(s, grid) for s in family]
        for n in (2, 3, 4):
            v = rank_sum_test(phis, n)
            cells = range(grid.M)
            exact = [exact_rank_sum(family, n, Fraction(2 * i + 1, 2 * grid.M), 4) for i in cells]
            np.testing.assert_array_equal(v.ranks, [r for r, _ in exact])
            np.testing.assert_array_equal(v.rank_sums, [t for _, t in exact])


@pytest.mark.parametrize(
    "family, n_max, declared",
    [
        ([TWO_CELLS], 12, 2),
        ([((0, 1), (3, 4))], 12, 3),
        ([((0, 1), (6, 7))], 12, 6),
        ([((0, 1),)], 8, ">= 8"),
        ([((0, 1),), ((1, 2),)], 6, ">= 6"),
    ],
)
def test_invariance_order(family, n_max, declared):
    res = invariance_order([sampled(*iv) for iv in family], n_max)
    assert res.declared == declared
    assert res.consistent and not res.violations


def test_order_six_divisor_structure():
    res = invariance_order([sampled((0, 1), (6, 7))], 12)
    passing = sorted(n for n, v in res.verdicts.items() if v.invariant)
    assert passing == [2, 3, 6]


def test_order_of_haar_is_one():
    res = invariance_order([evaluate(BSpline(0), FrequencyGrid(256, 16))], 8)
    assert res.order == 1 and res.ti is None


def test_order_translation_invariant_candidate_runs_ti_check():
    res = invariance_order([sampled((0, 1))], 8)
    assert res.translation_invariant_candidate and res.ti is True


def test_order_rejects_small_n_max():
    with pytest.raises(ValueError):
        invariance_order([sampled((0, 1))], 1)


def test_subgroup_violations_detected():
    divisor_bad, lcm_bad = subgroup_violations({2: False, 3: True, 4: True, 5: False, 6: False})
    assert divisor_bad == ["invariant for n=4 but not for its divisor 2"]
    assert lcm_bad == ["invariant for n=3 and n=4 but not for lcm 12"] or lcm_bad == []
    _, lcm_bad = subgroup_violations({n: n in (2, 3) for n in range(2, 9)})
    assert lcm_bad == ["invariant for n=2 and n=3 but not for lcm 6"]


def test_order_threads_env(monkeypatch):
    monkeypatch.setenv("SIS_INVARIANCE_THREADS", "4")
    res = invariance_order([sampled((0, 1), (6, 7))], 12)
    assert res.declared == 6


@pytest.mark.parametrize(
    "family, expected",
    [
        ([((0, 1),)], True),
        ([((0, 2),)], False),
        ([((0, 1),), ((1, 2),)], True),
        ([TWO_CELLS], False),
    ],
)
def test_ti_check(family, expected):
    assert ti_check([sampled(*iv) for iv in family]) is expected


def test_ti_check_two_interval_multiplier_argument():
    # chi_[0,1) is not a 1-periodic multiple of chi_[0,2): the multiplier would need 1 and 0 at w, w+1
    wide = indicator((0, 2))
    assert support_measure(wide, -16, 16) == 2 > 1
    assert not ti_check([sampled((0, 2))])


@pytest.mark.parametrize(
    "intervals, n, expected",
    [
        (TWO_CELLS, 2, 1),
        (TWO_CELLS, 4, 2),
        (((0, 1),), 3, 1),
        (((0, 1),), 7, 1),
    ],
)
def test_residue_support_profile(intervals, n, expected):
    assert np.all(residue_support_profile(sampled(*intervals), n) == expected)


def test_residue_profile_requires_one_generator():
    with pytest.raises(SISError):
        residue_support_profile([sampled((0, 1)), sampled((1, 2))], 2)


def test_residue_profile_matches_rank_test_for_principal_spaces():
    rng = np.random.default_rng(5)
    for _ in range(30):
        family = random_family(rng, max_generators=1)
        grid = aligned_grid(family, 4)
        phi = evaluate(family[0], grid)
        for n in range(2, 7):
            by_profile = bool(np.all(residue_support_profile(phi, n) <= 1))
            assert by_profile == rank_sum_test([phi], n).invariant


@pytest.mark.parametrize(
    "family, expected",
    [
        ([((0, 2),)], [0, 1]),
        ([((0, 1),), ((1, 2),)], [0, 0, 1]),
    ],
)
def test_rank_level_sets(family, expected):
    np.testing.assert_array_equal(rank_level_sets([sampled(*iv) for iv in family]), expected)


def test_rank_level_sets_zero(grid):
    zero = SampledSpectrum(grid, np.zeros(grid.shape))
    np.testing.assert_array_equal(rank_level_sets([zero]), [1, 0])


def test_rank_level_sets_partial_support():
    spec = indicator((0, "1/4"), (2, "9/4"))
    measures = rank_level_sets([sampled((0, "1/4"), (2, "9/4"))])
    np.testing.assert_array_equal(measures, [0.75, 0.25])
    assert support_measure(spec, 0, 1) == Fraction(1, 4)


@pytest.mark.parametrize(
    "intervals, n, zero_measure, bound",
    [
        (TWO_CELLS, 2, 1.0, 1.0),
        (((0, 1),), 3, 2.0, 2.0),
        (((0, "1/4"), (2, "9/4")), 2, 1.75, 1.75),
    ],
)
def test_zero_set_bound(intervals, n, zero_measure, bound):
    spec = indicator(*intervals)
    # exact interval arithmetic: zero set = n - support on [0, n)
    assert n - support_measure(spec, 0, n) == zero_measure
    budget = zero_set_bound_check([sampled(*intervals)], n, 0)
    assert budget.bound == pytest.approx(bound)
    assert budget.generators[0].zero_measure == pytest.approx(zero_measure)
    assert budget.passes
    assert budget.slack == 2 * n / 256
    assert budget.large_n_bound == n - 1


def test_zero_set_bound_zero_spectrum(grid):
    zero = SampledSpectrum(grid, np.zeros(grid.shape))
    budget = zero_set_bound_check([zero], 2, 0)
    assert budget.bound == 2 and budget.generators[0].zero_measure == 2 and budget.passes


def test_zero_set_bound_shifted_interval():
    budget = zero_set_bound_check([sampled(*TWO_CELLS)], 2, Fraction(1, 2))
    assert budget.interval == (Fraction(1, 2), Fraction(5, 2))
    assert budget.generators[0].zero_measure == pytest.approx(1.0)


def test_zero_set_bound_refuses_non_invariant():
    with pytest.raises(HypothesisViolation):
        zero_set_bound_check([sampled(*TWO_CELLS)], 4, 0)


def h_direct(n, k, w):
    """Two-branch evaluation straight from the definition of the multiplier."""
    total = 0j
    for j in range(-k, n - k):
        if np.floor(w) % n == (k + j):
            total += cmath.exp(2j * cmath.pi * j / n)
    return cmath.exp(-2j * cmath.pi * w / n) * total


@pytest.mark.parametrize(
    "n, k, omega, expected",
    [
        (2, 0, 0.25, cmath.exp(-1j * cmath.pi / 4)),
        (2, 0, 0.5, -1j),
        (2, 0, 1.5, -1j),
    ],
)
def test_modulation_h_examples(n, k, omega, expected):
    assert modulation_h(n, k, omega) == pytest.approx(expected, abs=1e-15)
    assert h_direct(n, k, omega) == pytest.approx(expected, abs=1e-15)


def test_modulation_h_vectorized_matches_direct():
    w = np.linspace(-7, 7, 301)
    for n in (2, 3, 5):
        for k in range(n):
            np.testing.assert_allclose(modulation_h(n, k, w), [h_direct(n, k, x) for x in w], atol=1e-14)
