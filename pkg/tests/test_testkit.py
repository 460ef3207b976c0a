import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crelab.exceptions import DataError
from crelab.rng import rng_derive
from crelab.noise import Uniform
from crelab.testkit import (
    FrequencyPair,
    ValuationSampleSet,
    Verdict,
    ci_strong_consistency,
    classify_arrays,
    mean_test,
    mnoss_region_test,
    proportion_ci,
    sign_scores,
    sign_test,
    strong_test,
    weak_test,
)

unit = st.floats(0.0, 1.0)
GRID = np.linspace(0.0, 1.0, 201)
AB, CD = np.meshgrid(GRID, GRID, indexing="ij")


class TestPointTests:
    def test_weak_examples(self):
        assert weak_test(FrequencyPair(0.6, 0.6)) == Verdict.EU
        assert weak_test(FrequencyPair(0.80, 0.35)) == Verdict.CRE
        assert weak_test(FrequencyPair(0.3, 0.5)) == Verdict.RCRE

    def test_weak_tolerance(self):
        assert weak_test(FrequencyPair(0.55, 0.5), tol=0.1) == Verdict.EU

    def test_strong_examples(self):
        assert strong_test(FrequencyPair(0.80, 0.35)) == Verdict.CRE
        assert strong_test(FrequencyPair(0.5, 0.5)) == Verdict.EU
        assert strong_test(FrequencyPair(0.4, 0.6)) == Verdict.RCRE

    def test_strong_boundaries(self):
        assert strong_test(FrequencyPair(0.5, 0.4)) == Verdict.CRE
        assert strong_test(FrequencyPair(0.6, 0.5)) == Verdict.CRE
        assert strong_test(FrequencyPair(0.5, 0.6)) == Verdict.RCRE

    def test_mnoss_examples(self):
        assert mnoss_region_test(FrequencyPair(2 / 3, 1 / 3)) == Verdict.EU
        assert mnoss_region_test(FrequencyPair(0.9, 0.2)) == Verdict.CRE
        assert mnoss_region_test(FrequencyPair(0.4, 1.0)) == Verdict.RCRE

    def test_mnoss_band_is_closed(self):
        # selecting the intended option with probability exactly 1/2 is still allowed
        assert mnoss_region_test(FrequencyPair(0.5, 1.0)) == Verdict.EU
        assert mnoss_region_test(FrequencyPair(1.0, 0.5)) == Verdict.EU

    def test_frequency_range(self):
        with pytest.raises(DataError):
            FrequencyPair(1.2, 0.3)

    def test_counts_exact(self):
        fp = FrequencyPair.from_counts(76, 95, 33, 95)
        assert fp.rho_ab == 76 / 95 and fp.k_cd == 33


class TestGrid:
    @pytest.mark.parametrize("test", ["weak", "strong", "mnoss"])
    def test_partition(self, test):
        v = classify_arrays(AB, CD, test)
        counts = sum(np.count_nonzero(v == k) for k in Verdict)
        assert counts == AB.size

    def test_nesting(self):
        weak = classify_arrays(AB, CD, "weak")
        strong = classify_arrays(AB, CD, "strong")
        band = classify_arrays(AB, CD, "mnoss")
        for verdict in (Verdict.CRE, Verdict.RCRE):
            assert np.all((band == verdict) <= (strong == verdict))
            assert np.all((strong == verdict) <= (weak == verdict))

    def test_matches_scalar(self):
        v = classify_arrays(AB[::10, ::10], CD[::10, ::10], "strong")
        for (i, j), got in np.ndenumerate(v):
            assert got == strong_test(FrequencyPair(AB[::10, ::10][i, j], CD[::10, ::10][i, j]))

    @given(unit, unit)
    def test_strong_implies_weak(self, ab, cd):
        fp = FrequencyPair(ab, cd)
        if strong_test(fp) == Verdict.CRE:
            assert weak_test(fp) == Verdict.CRE

    @given(unit, unit)
    def test_mirror_symmetry(self, ab, cd):
        flip = {Verdict.CRE: Verdict.RCRE, Verdict.RCRE: Verdict.CRE, Verdict.EU: Verdict.EU}
        assert strong_test(FrequencyPair(cd, ab)) == flip[strong_test(FrequencyPair(ab, cd))]
        assert mnoss_region_test(FrequencyPair(cd, ab)) == flip[mnoss_region_test(FrequencyPair(ab, cd))]


class TestConfidence:
    def test_wald_values(self):
        lo, hi = proportion_ci(48, 100)
        assert (lo, hi) == pytest.approx((0.382, 0.578), abs=1e-3)
        assert proportion_ci(30, 100) == pytest.approx((0.210, 0.390), abs=1e-3)

    def test_footnote_pair_consistent_with_cre(self):
        assert Verdict.CRE in ci_strong_consistency(48, 100, 30, 100, 0.95)

    def test_degenerate_counts(self):
        assert ci_strong_consistency(100, 100, 0, 100) == frozenset({Verdict.CRE})

    def test_zero_n(self):
        with pytest.raises(DataError):
            ci_strong_consistency(0, 0, 1, 2)

    def test_collapses_to_strong(self):
        n = 10**8
        assert ci_strong_consistency(int(0.8 * n), n, int(0.35 * n), n) == frozenset({Verdict.CRE})

    def test_clopper_pearson_contains_wald_centre(self):
        lo, hi = proportion_ci(48, 100, method="clopper-pearson")
        assert lo < 0.48 < hi

    @given(unit, unit, st.integers(5, 500), st.integers(2, 20), st.sampled_from(["wald", "clopper-pearson"]))
    def test_monotone_in_n(self, ab, cd, n, mult, method):
        small = ci_strong_consistency(round(ab * n), n, round(cd * n), n, method=method)
        big = ci_strong_consistency(round(ab * n) * mult, n * mult, round(cd * n) * mult, n * mult, method=method)
        assert big <= small


class TestValuationTests:
    def test_empty(self):
        vs = ValuationSampleSet(np.array([]), np.array([]))
        with pytest.raises(DataError):
            sign_test(vs)
        with pytest.raises(DataError):
            mean_test(vs)

    def test_ties_half(self):
        assert sign_scores(ValuationSampleSet([1.0, 2.0, 3.0], [1.0, 1.0, 4.0])).tolist() == [0.5, 1.0, 0.0]

    def test_exchangeable(self):
        s = rng_derive(1, 1)
        law = Uniform(0, 10)
        vs = ValuationSampleSet(law.sample(s.child(0), 100000), law.sample(s.child(1), 100000))
        out = sign_test(vs)
        assert abs(out.estimate - 0.5) <= 3 * out.se and out.verdict == Verdict.EU
        assert mean_test(vs).verdict == Verdict.EU

    def test_mean_shift(self):
        vs = ValuationSampleSet.from_pairs([(1.0, 2.0 + 0.01 * i) for i in range(50)])
        assert mean_test(vs).verdict == Verdict.CRE
        assert sign_test(vs).verdict == Verdict.CRE

    @given(st.lists(st.tuples(st.integers(0, 10**6), st.integers(0, 10**6)), min_size=1, max_size=60))
    def test_sign_invariant_under_monotone_map(self, pairs):
        # integer inputs keep the map strictly increasing after rounding
        vs = ValuationSampleSet.from_pairs(pairs)
        mapped = ValuationSampleSet(np.log1p(vs.m_ab) * 3 + 1, np.log1p(vs.m_cd) * 3 + 1)
        assert sign_test(vs).estimate == sign_test(mapped).estimate
