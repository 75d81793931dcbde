"""Tabular learner behavior: convergence to the oracle, sampling properties,
and invariance to input ordering."""
from __future__ import annotations

import numpy as np
import pytest

from gtobench import kernels
from gtobench.core import (
    CALL,
    FOLD,
    RAISE,
    ActionDistribution,
    ConfigError,
    DecisionState,
    SeedSpec,
    Street,
    Texture,
    validate_distribution,
)
from gtobench.game import (
    best_response_value,
    payoff_matrix,
    solve_equilibrium_detailed,
)
from gtobench.generator import GeneratorConfig, sample_states
from gtobench.learners import (
    ApproximatorSpec,
    NfspParams,
    StateKey,
    cfr_train,
    mccfr_train,
    nfsp_train,
    random_policy,
    regret_match,
)

RAISE_DOMINANT = DecisionState(Street.TURN, 0.9, Texture.DRY, 2)


def _tv(a, b) -> float:
    return 0.5 * float(np.abs(np.asarray(a) - np.asarray(b)).sum())


def _gap(policy, state, m, value) -> float:
    return value - best_response_value(policy.query(state).as_array(), m)


def _suite(n: int, seed: int = 777, headsup: bool = True):
    cfg = GeneratorConfig(headsup=headsup)
    return sample_states(cfg, SeedSpec(seed).stream(0), n)


class TestRegretMatch:
    def test_zero_regrets_uniform(self):
        assert regret_match((0.0, 0.0, 0.0)) == ActionDistribution.uniform()

    def test_positive_part_normalization(self):
        d = regret_match((2.0, 1.0, -5.0))
        np.testing.assert_allclose(d.as_array(), [2 / 3, 1 / 3, 0.0], atol=1e-15)

    def test_all_negative_uniform(self):
        assert regret_match((-1.0, -2.0, -3.0)) == ActionDistribution.uniform()


class TestStateKey:
    def test_bucket_edges(self):
        s = lambda e: DecisionState(Street.PRE, e, Texture.DRY, 2)
        assert StateKey.from_state(s(0.0)).equity_bucket == 0
        assert StateKey.from_state(s(0.049999)).equity_bucket == 0
        assert StateKey.from_state(s(0.05)).equity_bucket == 1
        assert StateKey.from_state(s(0.999)).equity_bucket == 19
        assert StateKey.from_state(s(1.0)).equity_bucket == 19

    def test_total_function(self):
        rng = SeedSpec(97).stream(0)
        for _ in range(2000):
            e = float(rng.random())
            b = StateKey.from_state(DecisionState(Street.PRE, e, Texture.DRY, 2)).equity_bucket
            assert 0 <= b < 20
            assert b <= e * 20 < b + 1 or b == 19

    def test_custom_bucket_count(self):
        s = DecisionState(Street.PRE, 0.5, Texture.DRY, 2)
        assert StateKey.from_state(s, buckets=4).equity_bucket == 2


class TestCfr:
    def test_dominant_row_converges(self):
        policy = cfr_train([RAISE_DOMINANT], 1000)
        assert _tv(policy.query(RAISE_DOMINANT).as_array(), [0.0, 1.0, 0.0]) <= 0.01

    def test_unvisited_key_uniform(self):
        policy = cfr_train([RAISE_DOMINANT], 100)
        other = DecisionState(Street.PRE, 0.1, Texture.PAIRED, 2)
        assert policy.query(other) == ActionDistribution.uniform()

    def test_guarantee_approaches_value(self):
        # Average-strategy shortfall shrinks like 1/sqrt(iters).
        for s in _suite(20, seed=11):
            m = payoff_matrix(s)
            _, value, _ = solve_equilibrium_detailed(m)
            for iters in (100, 10_000):
                policy = cfr_train([s], iters)
                assert _gap(policy, s, m, value) <= 3.0 / np.sqrt(iters)

    def test_oracle_consistency(self):
        # Unique equilibria matched in strategy, ties matched in value.
        for s in _suite(1000, seed=13):
            m = payoff_matrix(s)
            sigma_star, value, unique = solve_equilibrium_detailed(m)
            policy = cfr_train([s], 10_000)
            sigma = policy.query(s).as_array()
            if unique:
                assert _tv(sigma, sigma_star) <= 0.01
            else:
                assert abs(value - best_response_value(sigma, m)) <= 1e-3

    def test_permutation_invariant(self):
        states = _suite(60, seed=17)
        shuffled = list(states)
        SeedSpec(5).stream(9).shuffle(shuffled)
        a = cfr_train(states, 300).table
        b = cfr_train(shuffled, 300).table
        assert a.keys() == b.keys()
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])

    def test_rejects_zero_iters(self):
        with pytest.raises(ValueError):
            cfr_train([RAISE_DOMINANT], 0)

    def test_queries_are_distributions(self):
        states = _suite(50, seed=19, headsup=False)
        policy = cfr_train(states, 200)
        for s in states:
            validate_distribution(policy.query(s))


class TestMccfr:
    def test_dominant_row_converges(self):
        policy = mccfr_train([RAISE_DOMINANT], 50_000, seed=SeedSpec(5))
        assert _tv(policy.query(RAISE_DOMINANT).as_array(), [0.0, 1.0, 0.0]) <= 0.02

    def test_deterministic_given_seed(self):
        states = _suite(20, seed=23)
        a = mccfr_train(states, 500, seed=SeedSpec(40))
        b = mccfr_train(states, 500, seed=SeedSpec(40))
        for s in states:
            assert a.query(s) == b.query(s)

    def test_permutation_invariant(self):
        states = _suite(40, seed=29)
        shuffled = list(states)
        SeedSpec(6).stream(9).shuffle(shuffled)
        a = mccfr_train(states, 400, seed=SeedSpec(41)).table
        b = mccfr_train(shuffled, 400, seed=SeedSpec(41)).table
        assert a.keys() == b.keys()
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])

    def test_one_iteration_consults_only_sampled_branches(self):
        # uniforms pin the draws: villain column from (0.5, 0.5) via u=0.7
        # gives column 1, hero row from uniform thirds via u=0.2 gives row 0.
        # Entries off the sampled column and row must be invisible.
        uniforms = np.array([[[0.7, 0.2]]])
        base = np.array([[[0.3, -0.1], [0.9, 0.4], [-0.5, -0.5]]])
        perturbed = base.copy()
        perturbed[0, 1, 0] += 100.0
        perturbed[0, 2, 0] -= 55.0
        results = []
        for mats in (base, perturbed):
            hero_regret = np.zeros((1, 3))
            hero_ss = np.zeros((1, 3))
            villain_regret = np.zeros((1, 2))
            villain_ss = np.zeros((1, 2))
            kernels.mccfr_pass(
                mats,
                np.zeros(1, dtype=np.int64),
                hero_regret,
                hero_ss,
                villain_regret,
                villain_ss,
                uniforms,
            )
            results.append((hero_regret, hero_ss, villain_regret, villain_ss))
        for got, expected in zip(results[0], results[1]):
            np.testing.assert_array_equal(got, expected)

    def test_one_step_update_is_unbiased(self):
        # Many parallel one-step updates from non-uniform regret starting
        # points; their mean must match the full-expectation update.
        n = 50_000
        m = payoff_matrix(DecisionState(Street.FLOP, 0.62, Texture.PAIRED, 2)).entries
        r0 = np.array([0.4, -0.2, 0.1])
        q0 = np.array([0.3, 0.05])
        hero_regret = np.tile(r0, (n, 1))
        villain_regret = np.tile(q0, (n, 1))
        uniforms = SeedSpec(9).stream(2).random((1, n, 2))
        kernels.mccfr_pass(
            np.repeat(m[None, :, :], n, axis=0),
            np.arange(n, dtype=np.int64),
            hero_regret,
            np.zeros((n, 3)),
            villain_regret,
            np.zeros((n, 2)),
            uniforms,
        )
        sh = np.maximum(r0, 0.0) / np.maximum(r0, 0.0).sum()
        sv = np.maximum(q0, 0.0) / np.maximum(q0, 0.0).sum()
        u_h = m @ sv
        exact_h = u_h - sh @ u_h
        u_v = -(sh @ m)
        exact_v = u_v - sv @ u_v
        dh = hero_regret - r0
        dv = villain_regret - q0
        for a in range(3):
            se = dh[:, a].std(ddof=1) / np.sqrt(n)
            assert abs(dh[:, a].mean() - exact_h[a]) <= 3 * se
        for j in range(2):
            se = dv[:, j].std(ddof=1) / np.sqrt(n)
            assert abs(dv[:, j].mean() - exact_v[j]) <= 3 * se

    def test_agrees_with_cfr_on_unique_states(self):
        for n, s in enumerate(_suite(100, seed=31)):
            m = payoff_matrix(s)
            _, _, unique = solve_equilibrium_detailed(m)
            if not unique:
                continue
            pc = cfr_train([s], 50_000)
            pm = mccfr_train([s], 50_000, seed=SeedSpec(3100 + n))
            assert _tv(pc.query(s).as_array(), pm.query(s).as_array()) <= 0.05


class TestConvergenceCheckpoints:
    def test_nashconv_decreases_with_iterations(self):
        states = _suite(100, seed=37)
        decreasing_cfr = 0
        decreasing_mccfr = 0
        for n, s in enumerate(states):
            m = payoff_matrix(s)
            _, value, _ = solve_equilibrium_detailed(m)
            gaps_c = []
            gaps_m = []
            for iters in (100, 1000, 10_000):
                gaps_c.append(_gap(cfr_train([s], iters), s, m, value))
                gaps_m.append(_gap(mccfr_train([s], iters, seed=SeedSpec(3700 + n)), s, m, value))
            decreasing_cfr += gaps_c[0] >= gaps_c[1] >= gaps_c[2]
            decreasing_mccfr += gaps_m[0] >= gaps_m[1] >= gaps_m[2]
        assert decreasing_cfr >= 95
        assert decreasing_mccfr >= 95


class TestNfsp:
    def test_dominant_row_argmax(self):
        policy = nfsp_train([RAISE_DOMINANT], 50_000, seed=SeedSpec(7))
        assert policy.query(RAISE_DOMINANT).argmax_action() == RAISE

    def test_zero_anticipatory_never_updates_average(self):
        params = NfspParams(anticipatory=0.0)
        policy = nfsp_train([RAISE_DOMINANT], 5000, n=params, seed=SeedSpec(8))
        assert policy.query(RAISE_DOMINANT) == ActionDistribution.uniform()

    def test_unvisited_key_uniform(self):
        policy = nfsp_train([RAISE_DOMINANT], 100, seed=SeedSpec(9))
        other = DecisionState(Street.RIVER, 0.2, Texture.MONOTONE, 2)
        assert policy.query(other) == ActionDistribution.uniform()

    def test_deterministic_given_seed(self):
        states = _suite(10, seed=41)
        a = nfsp_train(states, 2000, seed=SeedSpec(42))
        b = nfsp_train(states, 2000, seed=SeedSpec(42))
        for s in states:
            assert a.query(s) == b.query(s)

    def test_permutation_invariant(self):
        states = _suite(30, seed=43)
        shuffled = list(states)
        SeedSpec(7).stream(9).shuffle(shuffled)
        a = nfsp_train(states, 1000, seed=SeedSpec(44)).table
        b = nfsp_train(shuffled, 1000, seed=SeedSpec(44)).table
        assert a.keys() == b.keys()
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])

    def test_param_validation(self):
        with pytest.raises(ConfigError):
            NfspParams(anticipatory=1.5)
        with pytest.raises(ConfigError):
            NfspParams(rl_learning_rate=0.0)
        with pytest.raises(ConfigError):
            NfspParams(epsilon_explore=1.5)

    def test_queries_are_distributions(self):
        states = _suite(40, seed=47, headsup=False)
        policy = nfsp_train(states, 500, seed=SeedSpec(48))
        for s in states:
            validate_distribution(policy.query(s))


class TestRandomPolicy:
    def test_uniform_everywhere(self):
        policy = random_policy()
        for s in _suite(20, seed=53, headsup=False):
            assert policy.query(s) == ActionDistribution.uniform()

    def test_state_independent(self):
        policy = random_policy()
        a = policy.query(DecisionState(Street.PRE, 0.9, Texture.DRY, 2))
        b = policy.query(DecisionState(Street.RIVER, 0.1, Texture.MONOTONE, 6))
        assert a == b

    def test_kind(self):
        assert random_policy().kind == "random"
