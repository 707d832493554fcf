import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_school
from monocat.errors import ModelError
from monocat.priors import QualitySupport, build_receiver
from monocat.schooling import (SchoolingConfig, build_learning, censorship_config, censorship_threshold,
                               censorship_threshold_sweep, check_school_full_pooling, induce_sender,
                               initial_learning, payoff_identity_residual, pooling_over_beliefs,
                               pooling_over_lambda, pooling_over_sigma, school_payoff, solve_school, verify_ic)
from monocat.solver import Categorization
from monocat.valuation import dp_oracle, random_categorization, sender_value


def const(v):
    return lambda a: np.full(np.shape(a), float(v))


def linear_cost(c0=2.0, slope=-1.0):
    return lambda a: c0 + slope * np.asarray(a, dtype=float)


@pytest.fixture
def R():
    return build_receiver("uniform")


class TestConfig:
    def test_cost_bound(self, R):
        with pytest.raises(ModelError, match="need c > lambda"):
            SchoolingConfig(R, R, linear_cost(1.0, -0.5), lam=0.6)

    def test_cost_must_fall(self, R):
        with pytest.raises(ValueError, match="decreasing"):
            SchoolingConfig(R, R, linear_cost(1.0, 0.5))

    def test_parameter_ranges(self, R):
        with pytest.raises(ValueError):
            SchoolingConfig(R, R, const(2), lam=-0.1)
        with pytest.raises(ValueError):
            SchoolingConfig(R, R, const(2), sigma=1.5)

    def test_supports_must_match(self, R):
        F0 = build_receiver("uniform", support=QualitySupport(0.0, 2.0))
        with pytest.raises(ValueError, match="supports"):
            SchoolingConfig(R, F0, const(2))

    def test_tie_goes_to_zero_learning(self, R):
        # lambda = sigma * E[c] exactly
        cfg = SchoolingConfig(R, R, const(2.0), lam=1.0, sigma=0.5)
        assert not cfg.intrinsic
        assert cfg.replace(lam=1.0 + 1e-9).intrinsic


class TestInducedSender:
    def test_no_learning_value_returns_beliefs(self, R):
        F0 = build_receiver("power", {"k": 0.5})
        S, K = induce_sender(SchoolingConfig(R, F0, linear_cost(), 0.0, 0.0))
        np.testing.assert_allclose(S.v, F0(S.x), atol=1e-12)
        assert K == 0.0 and S.jump_at_lo == 0.0

    @pytest.mark.parametrize("gamma,lam", [(0.5, 0.5), (0.3, 0.8), (1.0, 0.2)])
    def test_quadrature_matches_closed_form(self, gamma, lam):
        # away from a = 0 the truncated cost is exactly 1/a
        cfg = censorship_config(gamma, lam, n=4001)
        S_closed, _ = induce_sender(cfg)
        S_quad, _ = induce_sender(cfg.replace(sender_override=None))
        x = np.linspace(0.05, 1.0, 200)
        np.testing.assert_allclose(S_quad(x), S_closed(x), atol=2e-6)

    def test_closed_form_is_cdf(self):
        S, K = induce_sender(censorship_config(0.5, 0.5))
        assert S.is_cdf() and K == 0.0

    def test_party_school_jump(self):
        # sigma = 1, lambda = 0: the zero-learning branch, S(a_lo) = 0 below its right limit
        R = build_receiver("uniform")
        cfg = SchoolingConfig(R, R, linear_cost(), lam=0.0, sigma=1.0)
        S, K = induce_sender(cfg)
        assert not cfg.intrinsic
        assert S.value_at_lo == 0.0 and K == 0.0
        # S(0+) = int (2 - x) dx / 2 = 3/4
        assert S.jump_at_lo == pytest.approx(0.75, abs=1e-6)

    def test_intrinsic_branch_constant(self):
        sup = QualitySupport(1.0, 2.0)
        R = build_receiver("uniform", support=sup)
        cfg = SchoolingConfig(R, R, const(3.0), lam=1.0, sigma=0.0)
        S, K = induce_sender(cfg)
        # S(a_lo) = -lambda / (c - lambda) = -1/2 ; K = a_lo * S(a_lo)
        assert S.value_at_lo == pytest.approx(-0.5, abs=1e-12)
        assert K == pytest.approx(-0.5, abs=1e-12)
        assert S.jump_at_lo == pytest.approx(0.0, abs=1e-12)


class TestLearning:
    def test_full_pooling_is_flat(self, R):
        cfg = SchoolingConfig(R, R, linear_cost(), lam=0.5, sigma=0.0)
        A = Categorization.full_pooling(R.support)
        ell = build_learning(A, cfg)
        # a_hi itself is revealed, so the only jump sits there
        np.testing.assert_allclose(ell.values[:-1], ell.initial)
        assert ell.jumps == ((1.0, pytest.approx(0.5 / 0.5)),)
        assert ell.initial == pytest.approx(0.5 / (2.0 - 0.5))
        assert verify_ic(ell, A, cfg) <= 1e-12

    def test_full_separation_unit_slope(self):
        sup = QualitySupport(0.5, 1.5)
        R = build_receiver("uniform", support=sup)
        cfg = SchoolingConfig(R, R, const(2.0), lam=1.0)
        ell = build_learning(Categorization.full_separation(sup), cfg)
        np.testing.assert_allclose(ell.values, ell.initial + (ell.x - 0.5), atol=1e-12)
        assert ell.initial == 0.0  # A(a_lo) = a_lo

    def test_jumps_at_pool_edges(self, R):
        cfg = SchoolingConfig(R, R, linear_cost(), lam=0.5)
        A = Categorization(R.support, ((0.1, 0.3), (0.3, 0.7)))
        ell = build_learning(A, cfg)
        jumps = dict(ell.jumps)
        c = lambda t: 2.0 - t - 0.5
        assert jumps[0.1] == pytest.approx((0.2 - 0.1) / c(0.1))
        assert jumps[0.3] == pytest.approx((0.5 - 0.2) / c(0.3))
        assert jumps[0.7] == pytest.approx((0.7 - 0.5) / c(0.7))

    def test_monotone_and_flat_on_pools(self):
        rng = np.random.default_rng(8)
        cfg = random_school(rng)
        A = random_categorization(cfg.R, rng)
        ell = build_learning(A, cfg)
        assert np.all(np.diff(ell.values) >= -1e-12)
        assert np.all(ell.left <= ell.values + 1e-12)
        flat = np.diff(ell.values)[ell.pooled]
        np.testing.assert_allclose(flat, 0.0, atol=1e-12)

    def test_perturbation_breaks_ic(self):
        cfg = censorship_config(0.5, 0.7)
        sol = solve_school(cfg)
        ell = sol.learning
        k = int(np.searchsorted(ell.x, 0.9))
        assert verify_ic(ell, sol.categorization, cfg) <= 1e-6
        assert verify_ic(ell.perturbed(k, 0.1), sol.categorization, cfg) > 0


def test_jump_matches_pool_means():
    R = build_receiver("uniform")
    cfg = SchoolingConfig(R, R, linear_cost(), lam=0.25)
    A = Categorization(R.support, ((0.0, 0.2), (0.2, 0.6)))
    ell = build_learning(A, cfg)
    # at t = 0.2, A jumps from the first pool mean 0.1 to the second 0.4
    assert dict(ell.jumps)[0.2] == pytest.approx((0.4 - 0.1) / (2.0 - 0.2 - 0.25))


class TestPayoff:
    def test_full_pooling_payoff(self):
        R = build_receiver("uniform")
        cfg = SchoolingConfig(R, R, linear_cost(), lam=0.9, sigma=0.5)
        A = Categorization.full_pooling(R.support)
        ell = build_learning(A, cfg)
        l0 = initial_learning(A, cfg)
        # E c = 1.5 under uniform F0
        assert l0 == pytest.approx(0.5 / (2.0 - 0.9))
        assert school_payoff(A, ell, cfg) == pytest.approx(0.5 + (0.9 - 0.5 * 1.5) * l0, abs=1e-9)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=20, deadline=None)
    def test_identity(self, seed):
        rng = np.random.default_rng(seed)
        cfg = random_school(rng)
        A = random_categorization(cfg.R, rng)
        assert payoff_identity_residual(A, cfg) <= 1e-5

    def test_solution_is_optimal_for_induced_problem(self):
        rng = np.random.default_rng(21)
        cfg = random_school(rng)
        sol = solve_school(cfg)
        S, K = induce_sender(cfg)
        best = sender_value(sol.categorization, S, cfg.R)
        for _ in range(50):
            assert sender_value(random_categorization(cfg.R, rng), S, cfg.R) <= best + 1e-9
        assert verify_ic(sol.learning, sol.categorization, cfg) <= 1e-6


class TestFullPoolingCondition:
    def test_zero_lambda(self, R):
        F0 = build_receiver("power", {"k": 0.5})
        cfg = SchoolingConfig(R, F0, linear_cost(), lam=0.0, sigma=0.0)
        assert check_school_full_pooling(cfg)
        assert solve_school(cfg).categorization.is_full_pooling()

    def test_full_sigma(self, R):
        cfg = SchoolingConfig(R, R, linear_cost(), lam=0.9, sigma=1.0)
        assert check_school_full_pooling(cfg)
        assert solve_school(cfg).categorization.is_full_pooling()

    def test_censorship_instance_fails_condition(self):
        assert not check_school_full_pooling(censorship_config(0.5, 0.5))

    def test_comparative_statics(self, R):
        F0 = build_receiver("power", {"k": 0.5})
        cfg = SchoolingConfig(R, F0, linear_cost(), lam=0.5, sigma=0.3)
        # more learning value -> harder to pool; more internalised cost -> easier
        lam_flags = pooling_over_lambda(cfg, [0.0, 0.2, 0.4, 0.6, 0.8])
        assert lam_flags == sorted(lam_flags, reverse=True)
        sig_flags = pooling_over_sigma(cfg, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert sig_flags == sorted(sig_flags)
        beliefs = [build_receiver("power", {"k": k}) for k in (0.2, 0.5, 1.0)]
        belief_flags = pooling_over_beliefs(cfg, beliefs)
        assert belief_flags == sorted(belief_flags, reverse=True)


class TestCensorship:
    def test_structure_matches_oracle(self):
        cfg = censorship_config(0.5, 0.7)
        sol = solve_school(cfg)
        assert len(sol.categorization.pools) == 1 and sol.categorization.pools[0][0] == 0.0
        _, A_dp = dp_oracle(sol.S, cfg.R, 400)
        assert len(A_dp.pools) == 1 and A_dp.pools[0][0] == 0.0
        assert abs(censorship_threshold(A_dp) - sol.a_tilde) <= 2 / 400

    def test_threshold_values(self):
        # tangent from the origin: a~ minimises S(a)/a over (0, 1]
        a = np.linspace(1e-4, 1, 200_001)
        for gamma, lam in [(0.5, 0.7), (0.7, 0.5), (0.3, 0.9)]:
            S = (a ** gamma - lam * a) / (1 - lam * a)
            expected = a[np.argmin(S / a)]
            got = solve_school(censorship_config(gamma, lam)).a_tilde
            assert got == pytest.approx(expected, abs=2e-3)

    def test_gamma_one_separates(self):
        sol = solve_school(censorship_config(1.0, 0.4))
        assert sol.categorization.pools == () and sol.a_tilde == 0.0

    def test_threshold_reporting(self):
        sup = QualitySupport()
        assert censorship_threshold(Categorization.full_pooling(sup)) == 1.0
        assert censorship_threshold(Categorization.full_separation(sup)) == 0.0
        assert censorship_threshold(Categorization(sup, ((0.0, 0.3), (0.3, 0.5)))) == 0.5

    def test_sweep_rows(self):
        rows = censorship_threshold_sweep([0.5, 0.7], [0.3, 0.6], n=501, m=1001)
        assert [(r["gamma"], r["lambda"]) for r in rows] == [(0.5, 0.3), (0.5, 0.6), (0.7, 0.3), (0.7, 0.6)]
        assert rows[0]["full_pooling"] and rows[0]["a_tilde"] == 1.0

    @pytest.mark.parametrize("bad", [dict(gamma=0.0, lam=0.5), dict(gamma=0.5, lam=1.0)])
    def test_parameter_ranges(self, bad):
        with pytest.raises(ValueError):
            censorship_config(**bad)
