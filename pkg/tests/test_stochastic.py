"""Path sampling determinism, survival statistics, and the closed-form
anchors for the barrier problem."""

import math

import numpy as np
import pytest

from hydrostat import stochastic as st
from hydrostat.dynamics import RadiusSchedule
from hydrostat.stochastic import BrownianPath, GoodSetParams


class TestSamplePath:
    def test_deterministic(self):
        a = st.sample_path(1.0, 1e-2, seed=42)
        b = st.sample_path(1.0, 1e-2, seed=42)
        np.testing.assert_array_equal(a.values, b.values)

    def test_grid_and_start(self):
        p = st.sample_path(0.55, 0.1, seed=0)
        assert p.times[0] == 0.0 and p.values[0] == 0.0
        assert p.times[-1] == pytest.approx(0.55)
        assert np.all(np.diff(p.times) > 0)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            st.sample_path(-1.0, 0.1, 0)
        with pytest.raises(ValueError):
            st.sample_path(1.0, 0.0, 0)

    def test_terminal_moments(self):
        # CLT bounds at T = 1 over 10^4 substreams
        n = 10_000
        T = 1.0
        finals = np.empty(n)
        for i in range(n):
            rng = np.random.default_rng(st.path_seed(123, i))
            finals[i] = rng.standard_normal(10).sum() * math.sqrt(T / 10)
        assert abs(finals.mean()) <= 3.0 * math.sqrt(T / n)
        var = finals.var()
        assert abs(var - T) <= 3.0 * T * math.sqrt(2.0 / n)

    def test_substreams_differ(self):
        a = st.sample_path(1.0, 0.1, st.path_seed(5, 0))
        b = st.sample_path(1.0, 0.1, st.path_seed(5, 1))
        assert not np.allclose(a.values, b.values)


def flat_path(values, dt=1.0):
    values = np.asarray(values, dtype=float)
    times = dt * np.arange(len(values))
    return BrownianPath(times=times, values=values, seed=None, dt=dt)


class TestGoodSetIndicator:
    def test_zero_path_survives(self):
        p = flat_path(np.zeros(11))
        ok, t = st.good_set_indicator(p, GoodSetParams(1.0, 0.5, 1.0))
        assert ok and t is None

    def test_violation_reported_at_first_time(self):
        p = flat_path([0.0, 0.2, 3.0, 0.1])
        ok, t = st.good_set_indicator(p, GoodSetParams(1.0, 0.5, 1.0))
        assert not ok
        assert t == pytest.approx(2.0)  # 1 + 0.5*2 = 2 < 3

    def test_consistency_with_hitting_time(self):
        params = GoodSetParams(0.8, 0.3, 1.2)
        sched = RadiusSchedule.linear(0.8, 0.3)
        for i in range(50):
            p = st.sample_path(2.0, 0.01, st.path_seed(77, i))
            ok, t_bad = st.good_set_indicator(p, params)
            t_hit = st.hitting_time(p, sched, params.nu)
            assert ok == (t_hit is None)
            if not ok:
                assert t_hit == pytest.approx(t_bad)


class TestHittingTime:
    def test_zero_path_never_hits(self):
        p = flat_path(np.zeros(11))
        assert st.hitting_time(p, RadiusSchedule.constant(0.5), 1.0) is None

    def test_constant_radius_hit(self):
        p = flat_path([0.0, 0.3, 0.9, 0.2])
        t = st.hitting_time(p, RadiusSchedule.constant(0.5), 1.0)
        assert t == pytest.approx(2.0)

    def test_callable_radius(self):
        p = flat_path([0.0, 2.0])
        assert st.hitting_time(p, lambda t: 1.0 + t, 1.0) is None

    def test_nonpositive_initial_radius_rejected(self):
        p = flat_path([0.0, 0.1])
        with pytest.raises(ValueError):
            st.hitting_time(p, lambda t: 0.0, 1.0)


class TestGoodSetProbability:
    def test_closed_form_anchors(self):
        params = GoodSetParams(2.0, 0.5, 1.0)
        assert st.survival_paper_bound(params) == pytest.approx(1 - math.exp(-1.0))
        assert st.survival_exact(params) == pytest.approx(1 - math.exp(-2.0))
        # the exact value always dominates the lower bound
        for alpha, beta, nu in ((0.1, 0.1, 1.0), (2.0, 0.5, 1.0), (5.0, 2.0, 0.7)):
            p = GoodSetParams(alpha, beta, nu)
            assert st.survival_exact(p) >= st.survival_paper_bound(p)

    def test_estimate_matches_exact_at_long_horizon(self):
        # pre-build oracle check: fine-dt Monte Carlo vs reflection principle
        params = GoodSetParams(1.0, 1.0, 1.0)
        est = st.good_set_probability(params, T=20.0, dt=1e-3, n_paths=2000, seed=3)
        assert est.exact_value == pytest.approx(1 - math.exp(-2.0))
        assert abs(est.estimate - est.exact_value) <= 3.0 * est.std_error + 0.01
        assert est.estimate >= est.paper_bound - 3.0 * est.std_error

    def test_huge_alpha_always_survives(self):
        params = GoodSetParams(50.0, 1.0, 1.0)
        est = st.good_set_probability(params, T=1.0, dt=1e-2, n_paths=200, seed=1)
        assert est.estimate == 1.0

    def test_min_paths_enforced(self):
        with pytest.raises(ValueError):
            st.good_set_probability(GoodSetParams(1, 1, 1), 1.0, 0.1, 50)

    def test_seed_determinism_and_order_independence(self):
        params = GoodSetParams(1.5, 0.5, 1.0)
        a = st.good_set_probability(params, 2.0, 0.01, 300, seed=9)
        b = st.good_set_probability(params, 2.0, 0.01, 300, seed=9)
        assert a.estimate == b.estimate


class TestMaxExpNoise:
    def test_zero_path(self):
        p = flat_path(np.zeros(5))
        assert st.max_exp_noise(p, 2.0) == 1.0

    def test_monotone_path(self):
        p = flat_path([0.0, 0.5, 1.0, 1.5])
        assert st.max_exp_noise(p, 2.0) == pytest.approx(math.exp(3.0))

    def test_equals_exp_of_max(self):
        p = st.sample_path(1.0, 0.01, seed=8)
        assert st.max_exp_noise(p, 1.7) == pytest.approx(
            math.exp(1.7 * p.values.max()))

    def test_horizon_check(self):
        p = st.sample_path(1.0, 0.1, seed=8)
        with pytest.raises(ValueError):
            st.max_exp_noise(p, 1.0, T=2.0)
