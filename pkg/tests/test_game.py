"""Payoff construction and the equilibrium oracle, cross-checked against an
independent linear program."""
from __future__ import annotations

import math

import numpy as np
import pytest

from gtobench.core import (
    CALL,
    FOLD,
    RAISE,
    ConfigError,
    DecisionState,
    SeedSpec,
    Street,
    Texture,
    validate_distribution,
)
from gtobench.game import (
    DEFAULT_GAME_PARAMS,
    GameParams,
    PayoffMatrix,
    best_response_value,
    effective_equity,
    payoff_matrix,
    sample_villain_payoff,
    solve_equilibrium_bruteforce,
    solve_equilibrium_detailed,
)

scipy_optimize = pytest.importorskip("scipy.optimize")


def _state(equity, street=Street.TURN, texture=Texture.TWO_TONE, players=2):
    return DecisionState(street=street, equity=equity, texture=texture, players=players)


def _random_state(rng) -> DecisionState:
    return DecisionState(
        street=Street(int(rng.integers(4))),
        equity=float(rng.random()),
        texture=Texture(int(rng.integers(6))),
        players=int(rng.integers(2, 7)),
    )


def _lp_value(entries: np.ndarray) -> float:
    # Reference solver: maximize v subject to sigma' M[:, j] >= v per column,
    # sigma a distribution. Variables (sigma_0..2, v).
    c = np.array([0.0, 0.0, 0.0, -1.0])
    a_ub = np.hstack([-entries.T, np.ones((2, 1))])
    b_ub = np.zeros(2)
    a_eq = np.array([[1.0, 1.0, 1.0, 0.0]])
    b_eq = np.array([1.0])
    bounds = [(0, None)] * 3 + [(None, None)]
    res = scipy_optimize.linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds)
    assert res.status == 0
    return float(res.x[3])


class TestGameParams:
    def test_defaults(self):
        g = DEFAULT_GAME_PARAMS
        assert g.bet_by_street == (0.5, 0.75, 1.0, 1.25)
        assert g.fold_equity == 0.3
        assert g.fold_cost == 0.5

    def test_bet_must_be_positive(self):
        with pytest.raises(ConfigError):
            GameParams(bet_by_street=(0.5, 0.0, 1.0, 1.25))

    def test_fold_equity_range(self):
        with pytest.raises(ConfigError):
            GameParams(fold_equity=1.5)

    def test_multiplier_product_capped(self):
        with pytest.raises(ConfigError):
            GameParams(fold_equity=0.8, texture_fold_equity_adjust=(1.5, 1, 1, 1, 1, 1))


class TestPayoffMatrix:
    def test_shape_and_fold_row_enforced(self):
        with pytest.raises(ValueError):
            PayoffMatrix(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            PayoffMatrix(np.array([[0.0, 0.0], [0.0, 0.0], [-0.5, -0.4]]))

    def test_magnitude_cap(self):
        with pytest.raises(ValueError):
            PayoffMatrix(np.array([[11.0, 11.0], [0.0, 0.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):
            PayoffMatrix(np.array([[math.inf, 0.0], [0.0, 0.0], [0.0, 0.0]]))

    def test_entries_read_only(self):
        m = payoff_matrix(_state(0.6))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 9.9


class TestPayoffConstruction:
    def test_coinflip_values(self):
        # 2e - 1 vanishes, so only fold equity and fold cost remain.
        m = payoff_matrix(_state(0.5)).entries
        np.testing.assert_allclose(m[CALL], [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(m[FOLD], [-0.5, -0.5], atol=1e-15)
        assert m[RAISE, 0] == pytest.approx(0.3, abs=1e-15)

    def test_nuts_on_turn(self):
        # (2 - 1) (1 + 2 b) with the turn bet of one pot.
        m = payoff_matrix(_state(1.0, street=Street.TURN)).entries
        assert m[RAISE, 1] == pytest.approx(3.0, abs=1e-12)
        assert m[CALL, 0] == pytest.approx(1.0, abs=1e-15)
        assert m[CALL, 1] == pytest.approx(2.0, abs=1e-15)

    def test_fold_row_constant_everywhere(self):
        rng = SeedSpec(73).stream(0)
        for _ in range(300):
            m = payoff_matrix(_random_state(rng)).entries
            assert m[FOLD, 0] == m[FOLD, 1] == -0.5

    def test_multiway_equity_transform_applied(self):
        flat = payoff_matrix(_state(0.8, players=4)).entries
        manual = payoff_matrix(_state(0.8 ** 3, players=2)).entries
        np.testing.assert_allclose(flat, manual, atol=1e-15)

    def test_already_multiway_flag_skips_transform(self):
        s = _state(0.8, players=4)
        skipped = payoff_matrix(s, equity_already_multiway=True).entries
        headsup = payoff_matrix(_state(0.8, players=2)).entries
        np.testing.assert_allclose(skipped, headsup, atol=1e-15)
        assert effective_equity(s, equity_already_multiway=True) == 0.8
        assert effective_equity(s) == pytest.approx(0.8 ** 3, abs=1e-15)

    def test_texture_scales_fold_equity(self):
        dry = payoff_matrix(_state(0.5, texture=Texture.DRY)).entries
        wet = payoff_matrix(_state(0.5, texture=Texture.MONOTONE)).entries
        assert dry[RAISE, 0] == pytest.approx(0.33, abs=1e-15)
        assert wet[RAISE, 0] == pytest.approx(0.27, abs=1e-15)


class TestEquilibriumOracle:
    def test_dominant_row_is_pure(self):
        m = PayoffMatrix(np.array([[2.0, 2.0], [1.0, 0.5], [-0.5, -0.5]]))
        d, value = solve_equilibrium_bruteforce(m)
        assert d.as_tuple() == (1.0, 0.0, 0.0)
        assert value == pytest.approx(2.0, abs=1e-12)

    def test_matching_pennies_block(self):
        m = PayoffMatrix(np.array([[1.0, -1.0], [-1.0, 1.0], [-10.0, -10.0]]))
        d, value = solve_equilibrium_bruteforce(m)
        np.testing.assert_allclose(d.as_array(), [0.5, 0.5, 0.0], atol=1e-12)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_value_at_least_fold_payoff(self):
        rng = SeedSpec(79).stream(1)
        for _ in range(300):
            m = payoff_matrix(_random_state(rng))
            _, value = solve_equilibrium_bruteforce(m)
            assert value >= float(m.entries[FOLD, 0]) - 1e-12

    def test_strategy_is_distribution_and_achieves_value(self):
        rng = SeedSpec(79).stream(2)
        for _ in range(300):
            m = payoff_matrix(_random_state(rng))
            d, value = solve_equilibrium_bruteforce(m)
            validate_distribution(d)
            assert best_response_value(d.as_array(), m) == pytest.approx(value, abs=1e-12)

    def test_matches_linear_program(self):
        rng = SeedSpec(83).stream(0)
        for _ in range(300):
            m = payoff_matrix(_random_state(rng))
            _, value = solve_equilibrium_bruteforce(m)
            assert value == pytest.approx(_lp_value(m.entries), abs=1e-9)

    def test_matches_linear_program_on_arbitrary_matrices(self):
        rng = SeedSpec(83).stream(1)
        for _ in range(300):
            raw = rng.uniform(-3.0, 3.0, size=(3, 2))
            raw[2, 1] = raw[2, 0]
            m = PayoffMatrix(raw)
            _, value = solve_equilibrium_bruteforce(m)
            assert value == pytest.approx(_lp_value(m.entries), abs=1e-9)

    def test_value_monotone_in_equity(self):
        for street in Street:
            for texture in Texture:
                values = []
                for e in np.linspace(0.0, 1.0, 21):
                    m = payoff_matrix(_state(float(e), street=street, texture=texture))
                    values.append(solve_equilibrium_bruteforce(m)[1])
                assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    def test_uniqueness_flag_on_tied_candidates(self):
        # Two rows guarantee the same value through different strategies.
        m = PayoffMatrix(np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]]))
        _, _, unique = solve_equilibrium_detailed(m)
        assert not unique

    def test_uniqueness_flag_on_clear_winner(self):
        m = payoff_matrix(_state(0.9))
        _, _, unique = solve_equilibrium_detailed(m)
        assert unique


class TestVillainSampling:
    def test_deterministic_when_point_mass(self):
        rng = SeedSpec(89).stream(0)
        s = _state(0.7)
        for _ in range(50):
            assert sample_villain_payoff(s, FOLD, DEFAULT_GAME_PARAMS, (1.0, 0.0), rng) == -0.5

    def test_mean_matches_expectation(self):
        # Call entries at e=1, b=1 are 1 and 2, so a 50/50 villain yields 1.5.
        rng = SeedSpec(89).stream(1)
        s = _state(1.0, street=Street.TURN)
        n = 100_000
        draws = np.array(
            [sample_villain_payoff(s, CALL, DEFAULT_GAME_PARAMS, (0.5, 0.5), rng) for _ in range(n)]
        )
        sigma = draws.std(ddof=1) / math.sqrt(n)
        assert abs(draws.mean() - 1.5) < 3 * sigma

    def test_degenerate_villain_equals_matrix_entry(self):
        rng = SeedSpec(89).stream(2)
        s = _state(0.62, street=Street.FLOP, texture=Texture.PAIRED)
        m = payoff_matrix(s).entries
        for a in (CALL, RAISE, FOLD):
            assert sample_villain_payoff(s, a, DEFAULT_GAME_PARAMS, (1.0, 0.0), rng) == m[a, 0]
            assert sample_villain_payoff(s, a, DEFAULT_GAME_PARAMS, (0.0, 1.0), rng) == m[a, 1]
