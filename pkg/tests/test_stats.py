import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extinct import stats
from extinct.errors import DegenerateStd, EmptySample


class TestEcdf:
    def test_single_point(self):
        f = stats.ecdf([5.0])
        assert f(4.0) == 0.0
        assert f(5.0) == 1.0

    def test_midpoint(self):
        f = stats.ecdf([1, 2, 3, 4])
        assert f(2.5) == 0.5

    def test_ties_jump_together(self):
        f = stats.ecdf([2.0, 2.0])
        assert f(1.9999) == 0.0
        assert f(2.0) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(EmptySample):
            stats.ecdf([])

    def test_mean_recovered_from_ranks(self):
        rng = np.random.default_rng(0)
        x = rng.exponential(3.0, 500)
        f = stats.ecdf(x)
        # mean = integral of (1 - F) over the positive axis for x >= 0
        grid = np.linspace(0, x.max(), 200_001)
        mean_est = np.trapezoid(1.0 - f(grid), grid)
        assert mean_est == pytest.approx(x.mean(), rel=1e-3)


class TestKolmogorovPvalue:
    def test_zero(self):
        assert stats.kolmogorov_pvalue(0.0) == 1.0

    def test_large(self):
        assert stats.kolmogorov_pvalue(50.0) == 0.0

    def test_series_value_at_one(self):
        # 2(e^-2 - e^-8 + e^-18 - ...) = 0.26999967...
        assert stats.kolmogorov_pvalue(1.0) == pytest.approx(0.26999, abs=1e-4)

    def test_monotone_nonincreasing(self):
        # up to the documented 1e-12 series truncation error
        lams = np.linspace(0.0, 3.0, 301)
        qs = [stats.kolmogorov_pvalue(l) for l in lams]
        assert all(a >= b - 2e-12 for a, b in zip(qs, qs[1:]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            stats.kolmogorov_pvalue(-0.1)


class TestKsOneSample:
    def test_near_perfect_fit(self):
        n = 200
        # samples placed at the uniform quantiles i/(n+1)
        x = np.arange(1, n + 1) / (n + 1)
        res = stats.ks_one_sample(x, lambda t: np.clip(t, 0, 1))
        assert res.d_stat <= 1.0 / (n + 1) + 1e-12
        assert res.p_value > 0.99
        assert res.mode == "one_sample"
        assert res.n_eff == n

    def test_total_mismatch(self):
        res = stats.ks_one_sample([-5.0, -4.0], lambda t: np.ones_like(t))
        assert res.d_stat == 1.0
        res_big = stats.ks_one_sample(np.arange(50.0),
                                      lambda t: np.ones_like(t))
        assert res_big.d_stat == 1.0
        assert res_big.p_value < 1e-6

    def test_scalar_cdf_callable(self):
        res = stats.ks_one_sample([0.5], lambda t: float(min(max(t, 0), 1)))
        assert res.d_stat == 0.5

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.exponential(1.0, 300)
        base = stats.ks_one_sample(x, lambda t: 1 - np.exp(-np.maximum(t, 0)))
        # apply t -> t^2 (strictly monotone on the support) to both sides
        mapped = stats.ks_one_sample(
            x**2, lambda t: 1 - np.exp(-np.sqrt(np.maximum(t, 0))))
        assert mapped.d_stat == pytest.approx(base.d_stat, abs=1e-12)


class TestKsTwoSample:
    def test_identical_samples(self):
        x = [1.0, 2.0, 5.0, 9.0]
        res = stats.ks_two_sample(x, x)
        assert res.d_stat == 0.0
        assert res.p_value == 1.0

    def test_disjoint_supports(self):
        res = stats.ks_two_sample([1.0, 2.0], [3.0, 4.0])
        assert res.d_stat == 1.0

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=80)
        b = rng.normal(0.3, size=120)
        r1 = stats.ks_two_sample(a, b)
        r2 = stats.ks_two_sample(b, a)
        assert r1.d_stat == r2.d_stat
        assert r1.p_value == r2.p_value
        assert r1.n_eff == pytest.approx(80 * 120 / 200)

    def test_same_distribution_high_p(self):
        rng = np.random.default_rng(2)
        res = stats.ks_two_sample(rng.normal(size=400), rng.normal(size=400))
        assert res.p_value > 0.05

    @given(st.integers(0, 1000))
    @settings(max_examples=20, deadline=None)
    def test_common_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.exponential(2.0, 50)
        b = rng.exponential(2.5, 70)
        base = stats.ks_two_sample(a, b)
        mapped = stats.ks_two_sample(np.log1p(a), np.log1p(b))
        assert mapped.d_stat == pytest.approx(base.d_stat, abs=1e-12)


class TestSummarize:
    def test_constant(self):
        s = stats.summarize([3.0, 3.0, 3.0])
        assert (s.mean, s.std) == (3.0, 0.0)

    def test_hand_values(self):
        s = stats.summarize([1.0, 2.0, 3.0])
        assert s.mean == 2.0
        assert s.std == pytest.approx(1.0)
        assert s.sem == pytest.approx(1.0 / math.sqrt(3))
        assert s.count == 3

    def test_singleton_flagged(self):
        s = stats.summarize([7.0])
        assert (s.mean, s.std, s.degenerate) == (7.0, 0.0, True)


class TestZCompat:
    def test_zero_when_equal(self):
        s = stats.summarize([5.0, 6.0, 7.0])
        assert stats.z_compat(s, s.mean) == 0.0

    def test_hand_value(self):
        s = stats.SampleSummary(mean=46.62, std=1.05 * math.sqrt(1000),
                                sem=1.05, count=1000)
        assert stats.z_compat(s, 46.40) == pytest.approx(0.2095, abs=1e-3)

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateStd):
            stats.z_compat(stats.summarize([3.0, 3.0]), 3.0)
        with pytest.raises(DegenerateStd):
            stats.z_compat(stats.summarize([3.0]), 3.0)
