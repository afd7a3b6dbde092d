import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biasexpr import (
    EmptySample,
    InvalidParameter,
    StrategyDistribution,
    TargetFunction,
    applicable_targets_proportion,
    bias,
    bias_extrema,
    bias_of_strategy,
    conservation_sum,
    empirical_bias,
    enumerate_targets,
    famine_proportion,
    favorable_distributions_estimate,
    geometric_bound,
    hoeffding_bound,
    hoeffding_experiment,
    improbability_bound,
    improbability_estimate,
    mean_bias_over_distributions,
    uniform_strategy,
)
from biasexpr.bias_metrics import extrema_batch
from biasexpr.oracle import brute_force_extrema

from conftest import explicit

U4 = uniform_strategy(4)


def exact_two_point_tail(n, eps):
    """Pr(|X/n - 1/2| >= eps) for X ~ Bin(n, 1/2), with integer thresholds."""
    lo = math.floor(n * (0.5 - eps) + 1e-9)
    hi = math.ceil(n * (0.5 + eps) - 1e-9)
    ways = sum(math.comb(n, x) for x in range(n + 1) if x <= lo or x >= hi)
    return ways / 2**n


def strategy(*m):
    return StrategyDistribution(np.asarray(m, dtype=float))


class TestBiasOfStrategy:
    def test_half(self):
        assert bias_of_strategy(strategy(0.5, 0, 0, 0.5), TargetFunction(4, (0,))) == 0.25

    def test_uniform(self):
        for t in enumerate_targets(4, 2):
            assert bias_of_strategy(U4, t) == 0.0

    def test_point_mass(self):
        assert bias_of_strategy(strategy(1, 0, 0, 0), TargetFunction(4, (0,))) == 0.75


class TestBias:
    def test_demo(self, spike_and_flat, t0):
        d, s = spike_and_flat
        assert bias(d, s, t0) == pytest.approx(0.375, abs=1e-15)

    def test_resource_set_means_uniform(self, spike_and_flat, t0):
        d, s = spike_and_flat
        assert bias(d.resource_set, s, t0) == bias(d, s, t0)

    def test_uniform_mixture(self, two_point):
        # two point masses mix to (0.5, 0, 0, 0.5); shifting in two more gives uniform
        d, s = explicit(np.eye(4))
        for t in enumerate_targets(4, 2):
            assert abs(bias(d, s, t)) <= 1e-15

    def test_degenerate(self, t0):
        d, s = explicit([[1, 0, 0, 0], [0.25] * 4], weights=[1, 0])
        assert bias(d, s, t0) == 0.75


class TestEmpiricalBias:
    def test_uniform_copies(self, t0):
        assert empirical_bias([U4] * 7, t0) == 0.0

    def test_two_point(self, t0):
        assert empirical_bias([strategy(1, 0, 0, 0), strategy(0, 0, 0, 1)], t0) == 0.25

    def test_single(self, t0):
        s = strategy(0.1, 0.2, 0.3, 0.4)
        assert empirical_bias([s], t0) == pytest.approx(bias_of_strategy(s, t0), abs=1e-15)

    def test_empty(self, t0):
        with pytest.raises(EmptySample):
            empirical_bias([], t0)


class TestHoeffdingBound:
    def test_values(self):
        assert hoeffding_bound(100, 0.1) == pytest.approx(2 * math.exp(-2), rel=1e-12)
        assert hoeffding_bound(100, 0.2) == pytest.approx(6.7093e-4, rel=1e-4)

    def test_small_eps(self):
        assert hoeffding_bound(100, 1e-12) == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("n, eps", [(0, 0.1), (10, 0.0), (10, -0.1)])
    def test_invalid(self, n, eps):
        with pytest.raises(InvalidParameter):
            hoeffding_bound(n, eps)


class TestHoeffdingExperiment:
    def test_concentrated(self, t0):
        d, s = explicit([[1, 0, 0, 0], [0, 0, 0, 1]], weights=[1, 0])
        assert hoeffding_experiment(d, s, t0, 50, 0.01, 500, 0).exceedance_frequency == 0

    def test_two_point(self, two_point, t0):
        d, s = two_point
        res = hoeffding_experiment(d, s, t0, 100, 0.2, 10_000, 0)
        assert res.exceedance_frequency <= res.bound
        assert res.true_bias == 0.25

    def test_eps_too_large(self, two_point, t0):
        d, s = two_point
        assert hoeffding_experiment(d, s, t0, 10, 1.1, 1000, 3).exceedance_frequency == 0

    @pytest.mark.parametrize("n, eps", [(10, 0.2), (20, 0.1), (40, 0.15)])
    def test_matches_binomial_oracle(self, two_point, t0, n, eps):
        d, s = two_point
        trials = 20_000
        res = hoeffding_experiment(d, s, t0, n, eps, trials, seed=n)
        exact = exact_two_point_tail(n, eps)
        se = math.sqrt(exact * (1 - exact) / trials)
        assert abs(res.exceedance_frequency - exact) <= 4 * se
        assert exact <= res.bound

    def test_oracle_itself(self):
        # X <= 30 or X >= 70 out of 100
        assert exact_two_point_tail(100, 0.2) == pytest.approx(7.85013e-05, rel=1e-4)

    def test_seeded(self, two_point, t0):
        d, s = two_point
        a = hoeffding_experiment(d, s, t0, 30, 0.1, 3000, 8)
        b = hoeffding_experiment(d, s, t0, 30, 0.1, 3000, 8, chunk=1000)
        assert a == b


class TestBiasExtrema:
    def test_example(self):
        e = bias_extrema(strategy(0.5, 0.3, 0.2, 0), 2)
        assert e.sup_bias == pytest.approx(0.3, abs=1e-15)
        assert e.inf_bias == pytest.approx(-0.3, abs=1e-15)
        assert e.theorem1_bound == pytest.approx(0.3, abs=1e-15)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_uniform(self, k):
        e = bias_extrema(U4, k)
        assert e.sup_bias == e.inf_bias == e.theorem1_bound == 0

    def test_tight(self):
        e = bias_extrema(strategy(0.5, 0.5, 0, 0), 2)
        assert (e.sup_bias, e.inf_bias, e.theorem1_bound) == (0.5, -0.5, 0.5)

    def test_brute_force(self, rng):
        for n in range(2, 9):
            for _ in range(5):
                s = StrategyDistribution(rng.dirichlet(np.full(n, 0.5)))
                for k in range(1, n):
                    e = bias_extrema(s, k)
                    lo, hi = brute_force_extrema(s, k)
                    assert e.inf_bias == pytest.approx(lo - k / n, abs=1e-12)
                    assert e.sup_bias == pytest.approx(hi - k / n, abs=1e-12)

    def test_bound_holds_up_to_half(self, rng):
        for n in range(2, 13):
            P = rng.dirichlet(np.full(n, 0.3), size=500)
            for k in range(1, n // 2 + 1):
                inf_b, sup_b = extrema_batch(P, k)
                p = k / n
                assert np.all(sup_b <= (p - 1) / p * inf_b + 1e-12)

    def test_bound_fails_above_half(self):
        # any k > n/2 admits a counterexample
        e = bias_extrema(strategy(0.5, 0.5, 0), 2)
        assert e.sup_bias == pytest.approx(1 / 3)
        assert e.theorem1_bound == pytest.approx(1 / 12)
        assert e.sup_bias > e.theorem1_bound

    def test_lower_bound_direction(self, rng):
        # inf <= (p/(p-1)) sup wherever the upper bound holds (k <= n/2)
        for n in range(2, 10):
            P = rng.dirichlet(np.ones(n), size=300)
            for k in range(1, n // 2 + 1):
                inf_b, sup_b = extrema_batch(P, k)
                p = k / n
                assert np.all(inf_b <= p / (p - 1) * sup_b + 1e-12)

    def test_invalid_k(self):
        with pytest.raises(InvalidParameter):
            bias_extrema(U4, 0)


class TestConservation:
    def test_example(self):
        assert conservation_sum(strategy(0.5, 0.3, 0.2, 0), 2) == pytest.approx(0, abs=1e-15)

    def test_full_k(self, rng):
        s = StrategyDistribution(rng.dirichlet(np.ones(5)))
        assert abs(conservation_sum(s, 5)) <= 1e-15

    def test_n10_k4(self, rng):
        s = StrategyDistribution(rng.dirichlet(np.ones(10)))
        direct = math.fsum(bias_of_strategy(s, t) for t in enumerate_targets(10, 4))
        assert abs(direct) <= 1e-9 * 210
        assert abs(conservation_sum(s, 4)) <= 1e-9 * 210

    @given(st.integers(1, 9), st.data())
    @settings(max_examples=40, deadline=None)
    def test_any_strategy(self, n, data):
        k = data.draw(st.integers(1, n))
        raw = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n).filter(lambda v: sum(v) > 0.1))
        s = StrategyDistribution(np.asarray(raw) / sum(raw))
        assert abs(conservation_sum(s, k)) <= 1e-9 * math.comb(n, k)


class TestImprobability:
    @pytest.mark.parametrize("b, expected", [(0.25, 1.0), (0.0, 0.5), (-0.25, 0.0)])
    def test_values(self, b, expected):
        assert improbability_bound(0.25, b, 0.5) == expected

    def test_bad_q_min(self):
        with pytest.raises(InvalidParameter):
            improbability_bound(0.25, 0, 0)

    def test_estimate(self, spike_and_flat, t0):
        d, s = spike_and_flat
        est, exact, bound = improbability_estimate(d, s, t0, 0.5, 4000, 1)
        assert exact == 0.5
        assert bound == pytest.approx(1.25)
        assert abs(est.estimate - exact) <= 4 * math.sqrt(0.25 / 4000)


class TestFamineProportion:
    def test_demo(self, spike_and_flat, t0):
        d, s = spike_and_flat
        r = famine_proportion(d.resource_set, s, t0, 0.5)
        assert r.proportion == 0.5 and r.bound == pytest.approx(1.25) and r.holds

    def test_bias_free(self, t0):
        d, s = explicit([[0.25] * 4] * 3)
        r = famine_proportion(d.resource_set, s, t0, 0.5)
        assert r.proportion == 0 and r.bound == 0.5

    def test_single(self, t0):
        d, s = explicit([[1, 0, 0, 0]])
        r = famine_proportion(d.resource_set, s, t0, 1.0)
        assert r.proportion == 1 and r.bound == 1

    def test_holds_random(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 10))
            m = int(rng.integers(1, 8))
            d, s = explicit(rng.dirichlet(np.full(n, 0.3), size=m))
            t = TargetFunction.of(n, rng.choice(n, size=int(rng.integers(1, n)), replace=False))
            r = famine_proportion(d.resource_set, s, t, float(rng.uniform(0.05, 1)))
            assert r.proportion <= r.bound + 1e-12


class TestApplicableTargets:
    def test_point_mass(self):
        r = applicable_targets_proportion(strategy(1, 0, 0, 0), 1, 0.5)
        assert r.proportion == 0.25 and r.bound == pytest.approx(1 / 3)

    def test_uniform(self):
        for k in range(1, 4):
            assert applicable_targets_proportion(U4, k, 0.1).proportion == 0

    def test_pair(self):
        r = applicable_targets_proportion(strategy(0.5, 0.5, 0, 0), 2, 0.4)
        assert r.proportion == pytest.approx(1 / 6) and r.bound == pytest.approx(0.5 / 0.9)

    def test_holds_random(self, rng):
        for n in range(2, 10):
            for s in rng.dirichlet(np.full(n, 0.2), size=20):
                for k in range(1, n):
                    r = applicable_targets_proportion(StrategyDistribution(s), k, float(rng.uniform(0.01, 1 - k / n)))
                    assert r.holds


class TestFavorableDistributions:
    def test_demo(self, spike_and_flat, t0):
        d, s = spike_and_flat
        est, bound = favorable_distributions_estimate(d.resource_set, s, t0, 0.375, 10_000, 0)
        assert abs(est.estimate - 0.5) <= 3 * est.std_error
        assert bound == pytest.approx(0.625 / 0.375)

    def test_unreachable(self, spike_and_flat, t0):
        d, s = spike_and_flat
        est, _ = favorable_distributions_estimate(d.resource_set, s, t0, 0.8, 1000, 0)
        assert est.estimate == 0

    @pytest.mark.parametrize("q, expected", [(0.1, 1.0), (0.2, 0.0)])
    def test_identical(self, t0, q, expected):
        d, s = explicit([[0.4, 0.2, 0.2, 0.2]] * 3)
        est, _ = favorable_distributions_estimate(d.resource_set, s, t0, q, 500, 1)
        assert est.estimate == expected


class TestMeanBias:
    def test_demo(self, spike_and_flat, t0):
        d, s = spike_and_flat
        est = mean_bias_over_distributions(d.resource_set, s, t0, 5000, 2)
        assert abs(est.estimate - 0.375) <= 3 * est.std_error

    def test_uniform(self, t0):
        d, s = explicit([[0.25] * 4] * 4)
        assert abs(mean_bias_over_distributions(d.resource_set, s, t0, 100, 0).estimate) <= 1e-15

    def test_conservation(self, rng):
        d, s = explicit(rng.dirichlet(np.ones(4), size=3))
        total = sum(
            mean_bias_over_distributions(d.resource_set, s, t, 2000, 7).estimate for t in enumerate_targets(4, 1)
        )
        # the same seed gives the same weight draws for every target, so the sum is exact
        assert abs(total) <= 1e-12


class TestGeometric:
    def test_aligned(self):
        r = geometric_bound(TargetFunction(4, (0,)), strategy(1, 0, 0, 0), 1.0)
        assert r.cos_theta == 1 and r.bound == 1

    def test_uniform(self):
        r = geometric_bound(TargetFunction(4, (0,)), U4, 0.5)
        assert r.cos_theta == pytest.approx(0.5) and r.bound == pytest.approx(1.0)

    def test_orthogonal(self):
        r = geometric_bound(TargetFunction(4, (2,)), strategy(0.5, 0.5, 0, 0), 0.3)
        assert r.cos_theta == 0 and r.bound == 0

    def test_bound_on_success(self, rng):
        # q = sqrt(k) |P| cos(theta) <= sqrt(k) cos(theta) <= bound * q_min
        for n in range(2, 10):
            for s in rng.dirichlet(np.ones(n), size=20):
                t = TargetFunction.of(n, rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
                r = geometric_bound(t, StrategyDistribution(s), 0.5)
                assert r.success / 0.5 <= r.bound + 1e-12
