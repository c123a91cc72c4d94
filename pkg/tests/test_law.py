import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extinct import dist, law
from extinct.errors import NonPositiveEntry, NonPositiveTau, TooFewStates


def params_flat(m, n):
    return law.LawParams(dist.flat(m), n)


def random_params(seed, m_lo=3, m_hi=12, n_lo=10, n_hi=10**6):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(m_lo, m_hi + 1))
    p = rng.dirichlet(np.ones(m))
    while p.min() < 1e-6:  # keep the subset-sum oracle well conditioned
        p = rng.dirichlet(np.ones(m))
    d = dist.validate(p)
    return law.LawParams(d, int(rng.integers(n_lo, n_hi)))


class TestStateCdfPdf:
    def test_zero_mass_already_extinct(self):
        assert law.state_extinction_cdf(0.0, 12, 1.0) == 1.0

    def test_large_tau_limit(self):
        assert law.state_extinction_cdf(0.5, 1000, 1e18) == pytest.approx(1.0)

    def test_median_time(self):
        # tau = 2*N*p / ln 2 puts the single-state CDF at exactly 1/2
        tau = 1000.0 / math.log(2.0)
        assert law.state_extinction_cdf(0.5, 1000, tau) == pytest.approx(0.5)

    def test_nonpositive_tau(self):
        with pytest.raises(NonPositiveTau):
            law.state_extinction_cdf(0.5, 1000, 0.0)
        with pytest.raises(NonPositiveTau):
            law.state_extinction_pdf(0.5, 1000, -1.0)

    def test_pdf_limits(self):
        assert law.state_extinction_pdf(0.5, 1000, 1e-9) == pytest.approx(0.0)
        assert law.state_extinction_pdf(0.5, 1000, 1e15) == pytest.approx(0.0)

    def test_pdf_against_formula_and_cdf_derivative(self):
        tau = 1000.0 / math.log(2.0)
        value = law.state_extinction_pdf(0.5, 1000, tau)
        assert value == pytest.approx((1000.0 / tau**2) * 0.5, rel=1e-12)
        h = tau * 1e-6
        fd = (law.state_extinction_cdf(0.5, 1000, tau + h)
              - law.state_extinction_cdf(0.5, 1000, tau - h)) / (2 * h)
        assert value == pytest.approx(fd, rel=1e-8)
        assert value == pytest.approx(2.4023e-4, rel=1e-3)

    def test_pdf_integrates_to_one(self):
        from scipy import integrate
        val, err = integrate.quad(
            lambda t: law.state_extinction_pdf(0.2, 100, t), 0, np.inf,
            limit=200)
        assert val == pytest.approx(1.0, abs=1e-7)

    def test_pdf_requires_positive_mass(self):
        with pytest.raises(NonPositiveEntry):
            law.state_extinction_pdf(0.0, 10, 1.0)


class TestMinSurvivalCdfPdf:
    def test_limits_flat(self):
        p = params_flat(2, 1000)
        assert law.min_survival(p, 1e-6) == pytest.approx(1.0)
        assert law.min_survival(p, 1e15) == pytest.approx(0.0, abs=1e-10)
        assert law.min_cdf(p, 1e-6) == pytest.approx(0.0)
        assert law.min_cdf(p, 1e15) == pytest.approx(1.0)

    def test_survival_product_hand_value(self):
        # two flat states at the single-state median: (1 - 1/2)^2 = 1/4
        p = params_flat(2, 1000)
        tau = 1000.0 / math.log(2.0)
        assert law.min_survival(p, tau) == pytest.approx(0.25, rel=1e-12)
        assert law.min_cdf(p, tau) == pytest.approx(0.75, rel=1e-12)

    def test_cdf_plus_survival_is_exactly_one(self):
        p = random_params(3)
        taus = np.logspace(-2, 9, 40)
        assert np.all(law.min_cdf(p, taus) + law.min_survival(p, taus) == 1.0)

    def test_min_pdf_hand_value(self):
        p = params_flat(2, 1000)
        tau = 1000.0 / math.log(2.0)
        single = (1000.0 / tau**2) * 0.5
        assert law.min_pdf(p, tau) == pytest.approx(2 * single * 0.5, rel=1e-12)

    def test_min_pdf_limits(self):
        p = params_flat(2, 1000)
        assert law.min_pdf(p, 1e-8) == pytest.approx(0.0)
        assert law.min_pdf(p, 1e16) == pytest.approx(0.0, abs=1e-20)

    def test_rejects_zero_entries(self):
        d = dist.validate([0.5, 0.5, 0.0])
        p = law.LawParams(d, 100)
        with pytest.raises(NonPositiveEntry):
            law.min_cdf(p, 1.0)

    def test_monotone_nondecreasing(self):
        p = random_params(11)
        taus = np.logspace(-3, 10, 200)
        cdf = law.min_cdf(p, taus)
        assert np.all(np.diff(cdf) >= -1e-15)
        assert np.all((0 <= cdf) & (cdf <= 1))

    def test_large_m_no_underflow(self):
        d = dist.gen_with_entropy(100, 0.9, seed=2)
        p = law.LawParams(d, 10**6)
        lo = law.quantile(p, 1e-6)
        assert law.min_survival(p, lo / 4) <= 1.0
        assert np.isfinite(law.min_pdf(p, lo / 4))

    def test_pdf_matches_cdf_derivative_everywhere(self):
        p = random_params(5)
        qs = np.linspace(0.001, 0.999, 100)
        taus = np.array([law.quantile(p, q) for q in qs])
        pdf = law.min_pdf(p, taus)
        h = 5e-5 * taus
        fd = (law.min_cdf(p, taus + h) - law.min_cdf(p, taus - h)) / (2 * h)
        assert np.all(np.abs(pdf - fd) <= 1e-6 * np.maximum(pdf, 1e-300))


class TestMean:
    def test_flat_two_states(self):
        est = law.mean_first_extinction(params_flat(2, 1000))
        assert est.value == pytest.approx(2000 * math.log(2), abs=1e-4)

    def test_flat_three_states(self):
        est = law.mean_first_extinction(params_flat(3, 1000))
        assert est.value == pytest.approx(2000 * math.log(4 / 3), abs=1e-4)

    def test_three_state_hand_subset_sum(self):
        # independent 7-term inclusion-exclusion with a = (1000, 600, 400)
        a = [1000.0, 600.0, 400.0]
        expected = math.fsum(
            (-1) ** bin(mask).count("1")
            * sum(a[i] for i in range(3) if mask >> i & 1)
            * math.log(sum(a[i] for i in range(3) if mask >> i & 1))
            for mask in range(1, 8))
        p = law.LawParams(dist.validate([0.5, 0.3, 0.2]), 1000)
        est = law.mean_first_extinction(p)
        assert est.value == pytest.approx(expected, rel=1e-9)
        assert est.value == pytest.approx(509.79, abs=0.01)

    def test_error_estimate_is_honest(self):
        p = params_flat(7, 5000)
        est = law.mean_first_extinction(p)
        closed = law.flat_mean_closed_form(7, 5000)
        assert abs(est.value - closed) <= max(est.error * 10, 1e-9 * closed)

    def test_exact_n_linearity(self):
        p1 = random_params(21)
        for k in (2, 10):
            pk = law.LawParams(p1.dist, k * p1.n_samples)
            a = law.mean_first_extinction(p1).value
            b = law.mean_first_extinction(pk).value
            assert b == pytest.approx(k * a, rel=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        p = rng.dirichlet(np.ones(6))
        d1 = law.LawParams(dist.validate(p), 777)
        d2 = law.LawParams(dist.validate(rng.permutation(p)), 777)
        a = law.mean_first_extinction(d1).value
        b = law.mean_first_extinction(d2).value
        assert b == pytest.approx(a, rel=1e-12)

    def test_extra_state_never_increases_mean(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            m = int(rng.integers(2, 8))
            p = rng.dirichlet(np.ones(m))
            w = float(rng.uniform(0.05, 1.0))
            bigger = np.concatenate([p, [w]]) / (1 + w)
            mean_small = law.mean_first_extinction(
                law.LawParams(dist.validate(p), 1000)).value
            mean_big = law.mean_first_extinction(
                law.LawParams(dist.validate(bigger), 1000)).value
            assert mean_big <= mean_small * (1 + 1e-9)

    def test_pdf_normalization_and_survival_mean_route(self):
        from scipy import integrate
        p = random_params(31, m_hi=6, n_hi=10**4)
        lo = law.quantile(p, 1e-7)
        hi = law.quantile(p, 1 - 1e-7)
        mass, err = integrate.quad(lambda t: law.min_pdf(p, t), lo, hi,
                                   limit=500, epsabs=1e-10, epsrel=1e-9)
        assert mass == pytest.approx(1 - 2e-7, abs=5e-6 + 10 * err)
        # second, independent route to the mean: integrate the survival
        mean_s, err_s = integrate.quad(lambda t: law.min_survival(p, t),
                                       0, np.inf, limit=500, epsrel=1e-10)
        est = law.mean_first_extinction(p)
        assert mean_s == pytest.approx(est.value,
                                       abs=5e-7 * est.value + err_s + est.error)

    def test_zero_entry_rejected(self):
        d = dist.validate([0.6, 0.4, 0.0])
        with pytest.raises(NonPositiveEntry):
            law.mean_first_extinction(law.LawParams(d, 10))


class TestQuantile:
    def test_inverts_cdf(self):
        p = params_flat(2, 1000)
        tau = law.quantile(p, 0.75)
        assert tau == pytest.approx(1000.0 / math.log(2.0), rel=1e-10)
        assert law.min_cdf(p, tau) == pytest.approx(0.75, abs=1e-10)

    def test_median_algebraic_value(self):
        # (1 - e^{-1000/tau})^2 = 1/2  =>  tau = 1000 / -ln(1 - sqrt(1/2))
        p = params_flat(2, 1000)
        expected = 1000.0 / -math.log(1.0 - math.sqrt(0.5))
        assert law.quantile(p, 0.5) == pytest.approx(expected, rel=1e-10)

    def test_small_q_small_tau(self):
        p = params_flat(2, 1000)
        assert law.quantile(p, 1e-9) < law.quantile(p, 1e-3) < law.quantile(p, 0.5)

    @given(st.floats(1e-6, 1 - 1e-6))
    @settings(max_examples=50, deadline=None)
    def test_roundtrip_random_levels(self, q):
        p = law.LawParams(dist.validate([0.45, 0.35, 0.2]), 250)
        assert law.min_cdf(p, law.quantile(p, q)) == pytest.approx(q, rel=1e-9)

    def test_bad_level(self):
        with pytest.raises(NonPositiveTau):
            law.quantile(params_flat(2, 10), 0.0)


class TestFlatClosedForm:
    def test_reduces_to_two_state_log(self):
        assert law.flat_mean_closed_form(2, 1000) == pytest.approx(
            2000 * math.log(2), rel=1e-14)

    def test_reduces_to_three_state_log(self):
        assert law.flat_mean_closed_form(3, 1000) == pytest.approx(
            2000 * math.log(4 / 3), rel=1e-14)

    def test_linear_in_n(self):
        assert law.flat_mean_closed_form(3, 1) == pytest.approx(
            0.575364, abs=1e-6)

    def test_too_few(self):
        with pytest.raises(TooFewStates):
            law.flat_mean_closed_form(1, 10)
