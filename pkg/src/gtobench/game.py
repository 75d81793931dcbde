"""Per-state zero-sum matrix game and its exact equilibrium oracle.

Each decision state induces a 3x2 game: hero rows [call, raise, fold] against
villain columns [passive, aggressive], entries in pots with the pot normalized
to 1. Folding forfeits a fixed cost regardless of the villain, so the fold row
is constant. The oracle enumerates pure rows and column-equalizing two-row
mixtures, which covers every basic maximin solution of a 3x2 game.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ActionDistribution, ConfigError, DecisionState
from .proxy import multiway_equity

# Bet size per street in pots, indexed by Street order.
DEFAULT_BET_BY_STREET = (0.5, 0.75, 1.0, 1.25)
# Fold-equity multiplier per texture, indexed by Texture order: raises get
# through more often on dry boards, less on coordinated ones.
DEFAULT_TEXTURE_FOLD_EQUITY_ADJUST = (1.1, 1.0, 1.0, 0.9, 0.9, 1.0)

PAYOFF_MAGNITUDE_CAP = 10.0

# Two-row mixtures whose columns tie within this value window must coincide in
# strategy, or the equilibrium is flagged non-unique.
VALUE_TIE_TOL = 5e-3
STRATEGY_TIE_TV = 1e-6


@dataclass(frozen=True)
class GameParams:
    """Payoff-shaping knobs, all in pot units."""

    bet_by_street: tuple = DEFAULT_BET_BY_STREET
    fold_equity: float = 0.3
    fold_cost: float = 0.5
    texture_fold_equity_adjust: tuple = DEFAULT_TEXTURE_FOLD_EQUITY_ADJUST

    def __post_init__(self) -> None:
        if len(self.bet_by_street) != 4:
            raise ConfigError("bet_by_street needs one bet per street")
        if any(b <= 0 for b in self.bet_by_street):
            raise ConfigError(f"bets must be positive, got {self.bet_by_street}")
        if not 0.0 <= self.fold_equity <= 1.0:
            raise ConfigError(f"fold_equity must lie in [0, 1], got {self.fold_equity}")
        if len(self.texture_fold_equity_adjust) != 6:
            raise ConfigError("texture_fold_equity_adjust needs one multiplier per texture")
        if any(m < 0 for m in self.texture_fold_equity_adjust):
            raise ConfigError("texture fold-equity multipliers must be non-negative")
        if self.fold_equity * max(self.texture_fold_equity_adjust) > 1.0:
            raise ConfigError("fold_equity times its largest multiplier must stay within 1")


DEFAULT_GAME_PARAMS = GameParams()


@dataclass(frozen=True)
class PayoffMatrix:
    """Hero payoffs; the villain receives the negation of every entry."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=np.float64)
        if m.shape != (3, 2):
            raise ValueError(f"payoff matrix must be 3x2, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("payoff entries must be finite")
        if np.abs(m).max() > PAYOFF_MAGNITUDE_CAP:
            raise ValueError(f"payoff entries must stay within {PAYOFF_MAGNITUDE_CAP} pots")
        if m[2, 0] != m[2, 1]:
            raise ValueError(f"fold row must be villain-independent, got {m[2]}")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    def __eq__(self, other) -> bool:
        return isinstance(other, PayoffMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())

    def to_csv_row(self) -> str:
        return ",".join(f"{v:.17g}" for v in self.entries.ravel())


def effective_equity(x: DecisionState, equity_already_multiway: bool = False) -> float:
    """Win probability against the whole field."""
    if x.players == 2 or equity_already_multiway:
        return x.equity
    return multiway_equity(x.equity, x.players)


def payoff_matrix(
    x: DecisionState,
    g: GameParams = DEFAULT_GAME_PARAMS,
    equity_already_multiway: bool = False,
) -> PayoffMatrix:
    """Build the state's game.

    Calling risks the bet when the villain is aggressive; raising wins the pot
    outright with probability fe (fold equity) against a passive villain and
    escalates to two bets against an aggressive one; folding forfeits
    fold_cost unconditionally.
    """
    e = effective_equity(x, equity_already_multiway)
    b = g.bet_by_street[int(x.street)]
    fe = min(max(g.fold_equity * g.texture_fold_equity_adjust[int(x.texture)], 0.0), 1.0)
    edge = 2.0 * e - 1.0
    entries = np.array(
        [
            [edge, edge * (1.0 + b)],
            [fe + (1.0 - fe) * edge * (1.0 + b), edge * (1.0 + 2.0 * b)],
            [-g.fold_cost, -g.fold_cost],
        ]
    )
    return PayoffMatrix(entries)


def best_response_value(strategy: np.ndarray, m: PayoffMatrix) -> float:
    """Hero's guaranteed payoff: the worst column against the given mix."""
    return float(np.min(strategy @ m.entries))


def _equalizer_candidates(m: np.ndarray):
    """Two-row mixtures that make the villain indifferent between columns."""
    for i1 in range(3):
        for i2 in range(i1 + 1, 3):
            den = (m[i1, 0] - m[i1, 1]) + (m[i2, 1] - m[i2, 0])
            if abs(den) < 1e-14:
                continue
            lam = (m[i2, 1] - m[i2, 0]) / den
            if not 0.0 <= lam <= 1.0:
                continue
            s = np.zeros(3)
            s[i1] = lam
            s[i2] = 1.0 - lam
            yield s


def solve_equilibrium_detailed(
    m: PayoffMatrix,
    value_tie_tol: float = VALUE_TIE_TOL,
) -> tuple[np.ndarray, float, bool]:
    """Maximin strategy, game value, and a uniqueness flag.

    Candidates are the three pure rows plus every column-equalizing two-row
    mixture; a basic solution of the maximin LP for a 3x2 game always has one
    of these forms, so the best candidate is exact. The solution is flagged
    non-unique when another candidate guarantees a value within value_tie_tol
    yet differs in total variation by more than STRATEGY_TIE_TV.
    """
    entries = m.entries
    candidates = [np.eye(3)[i] for i in range(3)]
    candidates.extend(_equalizer_candidates(entries))
    values = [best_response_value(s, m) for s in candidates]
    best_idx = int(np.argmax(values))
    best, best_value = candidates[best_idx], values[best_idx]
    unique = True
    for s, v in zip(candidates, values):
        if best_value - v <= value_tie_tol:
            if 0.5 * np.abs(s - best).sum() > STRATEGY_TIE_TV:
                unique = False
                break
    return best, best_value, unique


def solve_equilibrium_bruteforce(m: PayoffMatrix) -> tuple[ActionDistribution, float]:
    """Exact minimax solution of the 3x2 game."""
    strategy, value, _ = solve_equilibrium_detailed(m)
    return ActionDistribution.from_array(strategy), value


def sample_villain_payoff(
    x: DecisionState,
    a: int,
    g: GameParams,
    villain,
    rng: np.random.Generator,
    equity_already_multiway: bool = False,
) -> float:
    """One stochastic payoff draw for hero action a.

    villain is a length-2 distribution over [passive, aggressive]; the draw
    consumes exactly one uniform.
    """
    p_passive = float(villain[0])
    m = payoff_matrix(x, g, equity_already_multiway)
    j = 0 if rng.random() < p_passive else 1
    return float(m.entries[a, j])
