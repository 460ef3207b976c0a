import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from crelab import valuation as V
from crelab.core import CRRAUtility, PowerUtility
from crelab.exceptions import ConstructionError, DomainError
from crelab.noise import Degenerate, DiscreteSign, TwoPointSym, Uniform, uniform_with_variance
from crelab.rng import rng_derive
from crelab.testkit import sign_scores

Y, P, R = 30.0, 0.8, 0.4


def rect_oracle(gamma, y=Y, p=P):
    return y * p ** (1 / gamma), 0.5 * y * (2 * p) ** (1 / gamma)


class TestGammaModel:
    def test_zero_noise(self):
        gm = V.GammaModel(CRRAUtility(0.5), Y, P, R)
        vs = V.gamma_valuation_sample(gm, 10, rng_derive(0))
        assert np.allclose(vs.m_ab, Y * P**2) and np.allclose(vs.m_cd, Y * P**2)

    def test_risk_neutral_means(self):
        gm = V.GammaModel(CRRAUtility(1.0), Y, P, R, Uniform(-3, 3), Uniform(-1, 1))
        vs = V.gamma_valuation_sample(gm, 200000, rng_derive(1))
        for m in (vs.m_ab, vs.m_cd):
            assert abs(m.mean() - 24.0) <= 3 * m.std() / math.sqrt(len(m))

    def test_two_point_reaches_sup(self):
        gamma = 0.5
        base = P * Y**gamma
        gm = V.GammaModel(CRRAUtility(gamma), Y, P, 1.0, TwoPointSym(0.999 * base), TwoPointSym(0.999 * base))
        vs = V.gamma_valuation_sample(gm, 100000, rng_derive(2))
        assert vs.m_ab.mean() == pytest.approx(rect_oracle(gamma)[1], rel=2e-3)

    def test_support_violation(self):
        gm = V.GammaModel(CRRAUtility(0.5), Y, P, R, Uniform(-10, 10))
        with pytest.raises(DomainError):
            V.gamma_valuation_sample(gm, 10, rng_derive(0))


class TestMeanBounds:
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.8, 1.0])
    def test_against_formula(self, gamma):
        rect = V.mean_bounds(gamma, Y, P)
        assert (rect.e_min, rect.e_max) == pytest.approx(rect_oracle(gamma), rel=1e-14)

    def test_paper_corners(self):
        assert V.mean_bounds(0.25, Y, P).corners == pytest.approx((12.288, 98.304))
        assert V.mean_bounds(0.5, Y, P).corners == pytest.approx((19.2, 38.4))
        assert V.mean_bounds(1.0, Y, P).corners == pytest.approx((24.0, 24.0))

    def test_collapse(self):
        rect = V.mean_bounds(0.99, Y, P)
        assert rect.e_max - rect.e_min < 0.3

    @pytest.mark.parametrize("p", [0.6, 0.8])
    def test_nested(self, p):
        rects = [V.mean_bounds(g, Y, p) for g in np.linspace(0.05, 1.0, 96)]
        for a, b in zip(rects, rects[1:]):
            assert a.e_min < b.e_min or math.isclose(a.e_min, b.e_min)
            assert a.e_max > b.e_max or math.isclose(a.e_max, b.e_max)

    @given(st.floats(0.05, 1.0), st.floats(0.0, 1.0))
    def test_two_point_inside(self, gamma, frac):
        rect = V.mean_bounds(gamma, Y, P)
        m = V.two_point_mean(rect.base, frac * rect.base, gamma)
        assert rect.e_min * (1 - 1e-12) <= m <= rect.e_max * (1 + 1e-12)


class TestMeanTarget:
    def test_risk_neutral_point(self):
        mc = V.construct_mean_target(24, 24, Y, P, R)
        assert mc.gamma == 1.0 and mc.c1 == 0 and mc.c2 == 0

    def test_far_target(self):
        mc = V.construct_mean_target(50, 15, Y, P, R)
        assert mc.gamma < 0.5
        assert V.mean_bounds(mc.gamma, Y, P).contains(50, 15)
        assert mc.means == pytest.approx((50, 15), abs=1e-8)

    def test_corner_target(self):
        mc = V.construct_mean_target(12.3, 98.3, Y, P, R, gamma=0.25)
        base = P * Y**0.25
        assert mc.c1 / base < 0.05 and mc.c2 / R / base > 0.95

    @given(st.floats(0.5, 99.5), st.floats(0.5, 99.5))
    def test_any_positive_target(self, z1, z2):
        mc = V.construct_mean_target(z1, z2, Y, P, R)
        assert mc.means == pytest.approx((z1, z2), abs=1e-8)

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            V.construct_mean_target(-1, 5, Y, P, R)

    def test_explicit_gamma_outside(self):
        with pytest.raises(ConstructionError):
            V.construct_mean_target(90, 5, Y, P, R, gamma=0.9)

    def test_sampled_means(self):
        mc = V.construct_mean_target(50, 15, Y, P, R)
        vs = V.gamma_valuation_sample(mc.model(), 200000, rng_derive(4))
        for m, z in ((vs.m_ab, 50), (vs.m_cd, 15)):
            assert abs(m.mean() - z) <= 3 * m.std() / math.sqrt(len(m))


class TestCoupled:
    def test_sign_target_values(self):
        assert V.construct_sign_target(0.75, 1.0).d == pytest.approx(0.5)
        assert V.construct_sign_target(1.0, 2.0).d == 2.0
        assert isinstance(V.construct_sign_target(0.5, 1.0), V.Independent)
        ce = V.construct_sign_target(0.2, 1.0)
        assert ce.orientation == "XisCD" and ce.d == pytest.approx(0.6)

    @pytest.mark.parametrize("q", [0.0, 1.5, -0.2])
    def test_sign_target_range(self, q):
        with pytest.raises(DomainError):
            V.construct_sign_target(q, 1.0)

    @pytest.mark.parametrize("d", [0.25, 0.5])
    def test_construction(self, d):
        ce = V.CoupledErrorConstruction(1.0, d)
        n = 100000
        x, y = V.coupled_xy(ce, n, rng_derive(7, int(d * 100)))
        assert stats.kstest(x, stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.01
        assert stats.kstest(y, stats.uniform(loc=-d, scale=2 * d).cdf).pvalue > 0.01
        q = (1 + d) / 2
        assert abs(np.mean(x > y) - q) <= 3 * math.sqrt(q * (1 - q) / n)

    def test_equal_widths_give_identical_draws(self):
        # at d = c the map is the identity: X >= Y surely, X > Y never
        ce = V.CoupledErrorConstruction(1.0, 1.0)
        x, y = V.coupled_xy(ce, 100000, rng_derive(7, 100))
        assert np.array_equal(x, y)
        assert stats.kstest(x, stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.01
        assert ce.prob_x_gt_y == 0.0

    @pytest.mark.parametrize("q", [0.25, 0.75, 0.95])
    def test_sign_probability(self, q):
        ce = V.construct_sign_target(q, 1.0, R)
        gm = V.GammaModel(CRRAUtility(0.5), Y, P, R, coupling=ce)
        n = 100000
        est = sign_scores(V.gamma_valuation_sample(gm, n, rng_derive(8))).mean()
        assert abs(est - q) <= 3 * math.sqrt(q * (1 - q) / n)


class TestAppendixA:
    def test_values(self):
        assert V.appendix_a_density(1, 1) == pytest.approx(5 / 12, abs=1e-15)
        assert V.appendix_a_density(-1, -1) == pytest.approx(1 / 12, abs=1e-15)

    @given(st.floats(-1, 1))
    def test_z1_zero(self, z2):
        assert V.appendix_a_density(0.0, z2) == 0.25

    def test_outside(self):
        with pytest.raises(DomainError):
            V.appendix_a_density(1.1, 0)

    def test_mass_and_minimum(self):
        g = np.linspace(-1, 1, 2001)
        vals = V.appendix_a_density(*np.meshgrid(g, g, indexing="ij"))
        mass = integrate.simpson(integrate.simpson(vals, x=g, axis=1), x=g)
        assert abs(mass - 1) < 1e-6
        assert vals.min() == pytest.approx(1 / 12, abs=1e-12)

    def test_marginals(self):
        a, b = V.appendix_a_sample(100000, rng_derive(9))
        for m in (a, b):
            assert stats.kstest(m, stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.01

    def test_remark_mixture_marginals(self):
        a, b = V.remark_mixture_sample(100000, rng_derive(10))
        for m in (a, b):
            assert stats.kstest(m, stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.01


class TestMeanBias:
    def test_mps_zero(self):
        assert V.mps_transform(np.zeros(5), 0.5, rng_derive(0)).tolist() == [0.0] * 5

    @given(st.floats(0.01, 0.99), st.floats(-5, 5))
    def test_mps_conditional_mean(self, r, x):
        hi, lo = (1 / r - 1) * x, -(1 / r + 1) * x
        assert 0.5 * (1 + r) * hi + 0.5 * (1 - r) * lo == pytest.approx(0.0, abs=1e-9 * max(1, abs(x) / r))

    def test_mps_distribution(self):
        r, n = 0.5, 100000
        s = rng_derive(11)
        law = Uniform(-1, 1)
        eps = law.sample(s.child(0), n)
        z = V.mps_transform(eps, r, s.child(1))
        other = law.sample(s.child(2), n) / r
        assert stats.ks_2samp(eps + z, other).pvalue > 0.01

    def test_example_one(self):
        mb = V.mean_bias_direction(PowerUtility(0.5), 0.8, 100.0, 0.5, uniform_with_variance(0.5), 10**6,
                                   rng_derive(12))
        assert abs(mb.delta - 3.0) <= 3 * mb.se

    def test_example_two_exact(self):
        oracle = 0.25 * (math.sqrt(10) + math.sqrt(30) - math.sqrt(18) - math.sqrt(22))
        got = V.mean_bias_exact(PowerUtility(2.0), 0.2, 10.0, 0.2, DiscreteSign())
        assert got == pytest.approx(oracle, abs=1e-12)
        assert abs(got + 0.0734) <= 5e-4

    def test_linear_unbiased(self):
        mb = V.mean_bias_direction(PowerUtility(1.0), 0.8, 100.0, 0.5, Uniform(-5, 5), 200000, rng_derive(13))
        assert abs(mb.delta) <= 3 * mb.se

    def test_domain_violation(self):
        with pytest.raises(DomainError):
            V.mean_bias_direction(PowerUtility(0.5), 0.8, 100.0, 0.5, Uniform(-20, 20), 1000, rng_derive(0))


class TestThetaBias:
    def test_paper_configuration(self):
        tc = V.theta_bias_construction(0.5, 0.3, 0.3)
        assert tc.guaranteed > 0.5 and 0 < tc.a < 0.4
        n = 200000
        vs = V.theta_bias_sample(tc, 30.0, CRRAUtility(0.5), n, rng_derive(14))
        est = np.mean(vs.m_cd > vs.m_ab)
        assert est > 0.5 + 3 * math.sqrt(0.25 / n)

    @given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.05, 0.95),
           st.sampled_from(["CD_over_AB", "AB_over_CD"]))
    def test_exceeds_theta(self, theta, p, r, direction):
        if abs(p + r - 1) < 1e-3:
            return
        tc = V.theta_bias_construction(theta, p, r, direction)
        assert tc.guaranteed > theta
        vs = V.theta_bias_sample(tc, 20.0, CRRAUtility(0.7), 4000, rng_derive(15))
        wins = vs.m_cd > vs.m_ab if direction == "CD_over_AB" else vs.m_ab > vs.m_cd
        # a win is certain whenever all three errors sit on the majority atom
        on_major = np.ones(len(vs), bool)
        s = rng_derive(15)
        for k in range(3):
            on_major &= tc.noise.sample(s.child(k), len(vs)) == tc.noise.a
        assert np.all(wins[on_major])

    def test_p_plus_r_one(self):
        with pytest.raises(DomainError):
            V.theta_bias_construction(0.5, 0.4, 0.6)


class TestResidual:
    U = CRRAUtility(0.5)

    def model(self, case, lam=None, one="zero"):
        return V.MultiplicativeModel(self.U, TwoPointSym(0.25), Uniform(-1, 1), case, one, lam)

    def test_case_one_closed_form(self):
        e_ab, e_cd = V.residual_closed_form(self.model("1"), Y, P, 0.5)
        assert e_ab == 0.0
        assert e_cd == pytest.approx(P * math.sqrt(30) / 3, abs=1e-12)
        assert e_cd == pytest.approx(1.4606, abs=1e-4)

    @pytest.mark.parametrize("case,lam,one", [("1", None, "zero"), ("1", None, "same"), ("2", None, "zero"),
                                              ("2", None, "same"), ("3a", 0.15, "zero"), ("3b", 0.15, "zero")])
    def test_monte_carlo_matches_closed_form(self, case, lam, one):
        mm = self.model(case, lam, one)
        rm = V.residual_moments(mm, Y, P, 0.5, 400000, rng_derive(16))
        e_ab, e_cd = V.residual_closed_form(mm, Y, P, 0.5)
        assert abs(rm.e_ab - e_ab) <= 4 * rm.se_ab
        assert abs(rm.e_cd - e_cd) <= 4 * rm.se_cd

    def test_sign_patterns(self):
        c1 = V.residual_closed_form(self.model("1"), Y, P, 0.5)
        c2 = V.residual_closed_form(self.model("2"), Y, P, 0.5)
        c3a = V.residual_closed_form(self.model("3a", 0.15), Y, P, 0.5)
        assert c1[0] < c1[1] and c2[0] > c2[1] and c3a[0] > 0 > c3a[1]

    def test_support(self):
        mm = V.MultiplicativeModel(self.U, TwoPointSym(0.6))
        with pytest.raises(DomainError):
            V.residual_moments(mm, Y, P, 0.5, 100, rng_derive(0))


class TestPrelecSign:
    def test_fixed_point_rejected(self):
        with pytest.raises(DomainError):
            V.prelec_sign_probability(math.exp(-1), 0.5, 1.0, 0.2, 10, rng_derive(0))

    def test_degenerate_alpha(self):
        est = V.prelec_sign_probability(0.8, 0.5, 1.0, 0.2, 1000, rng_derive(0), law=Degenerate(1.0))
        assert est.estimate == 0.5

    @pytest.mark.parametrize("p", [0.8, 0.2])
    def test_monte_carlo_matches_grid(self, p):
        exact = V.prelec_sign_exact(p, 0.5, 0.5)
        est = V.prelec_sign_probability(p, 0.5, 0.7, 0.5, 400000, rng_derive(17))
        assert abs(est.estimate - exact) <= 4 * est.se + 1e-3

    def test_directions(self):
        assert V.prelec_sign_exact(0.8, 0.5, 0.5) > 0.5
        assert 1 - V.prelec_sign_exact(0.2, 0.5, 0.5) < 0.5
