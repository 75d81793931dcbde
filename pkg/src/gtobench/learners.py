"""Self-play learners over bucketed state keys.

Each learner trains hero (3 actions) against a villain (2 columns) on the
per-state matrix games, then exposes a deterministic query from decision
state to action distribution. Visits are canonically sorted before training,
so results are invariant to the order of the input state list. All sampling
uniforms are drawn outside the kernels from one labeled stream per learner,
in (iteration, visit, draw) order; chunking the draws does not change the
sequence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .core import (
    ActionDistribution,
    ConfigError,
    DecisionState,
    SeedSpec,
    Street,
    Texture,
)
from .game import DEFAULT_GAME_PARAMS, GameParams, payoff_matrix

DEFAULT_EQUITY_BUCKETS = 20

# Stream labels under one run's SeedSpec; the harness reserves 0 and 1 for
# state generation and evaluation.
MCCFR_STREAM_ID = 2
NFSP_STREAM_ID = 3
DEEPCFR_STREAM_ID = 4

# Uniform draws are chunked to bound memory; the consumed sequence is
# identical for any chunk size.
_CHUNK_TARGET_DOUBLES = 4_000_000


@dataclass(frozen=True)
class StateKey:
    """Bucketed table address for one decision state."""

    street: Street
    equity_bucket: int
    texture: Texture
    players: int

    @classmethod
    def from_state(cls, x: DecisionState, buckets: int = DEFAULT_EQUITY_BUCKETS) -> "StateKey":
        bucket = min(int(x.equity * buckets), buckets - 1)
        return cls(street=x.street, equity_bucket=bucket, texture=x.texture, players=x.players)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (int(self.street), self.equity_bucket, int(self.texture), self.players)


@dataclass(frozen=True)
class NfspParams:
    """Mixing and learning rates for fictitious self-play.

    sl_learning_rate is part of the interface for approximator-based average
    policies; the tabular count-based average used here has no rate to apply
    it to.
    """

    anticipatory: float = 0.1
    rl_learning_rate: float = 0.05
    sl_learning_rate: float = 0.01
    epsilon_explore: float = 0.1
    epsilon_final: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 <= self.anticipatory <= 1.0:
            raise ConfigError(f"anticipatory must lie in [0, 1], got {self.anticipatory}")
        for name in ("rl_learning_rate", "sl_learning_rate", "epsilon_explore", "epsilon_final"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v}")


@dataclass(frozen=True)
class ApproximatorSpec:
    """Shape and training knobs of the small MLPs; activation is a rectifier."""

    input_width: int = 12
    hidden_width: int = 32
    hidden_layers: int = 1
    output_width: int = 3
    learning_rate: float = 0.01
    batch_size: int = 64
    buffer_capacity: int = 100_000

    def __post_init__(self) -> None:
        for name in (
            "input_width",
            "hidden_width",
            "hidden_layers",
            "output_width",
            "batch_size",
            "buffer_capacity",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.learning_rate < 1.0:
            raise ConfigError(f"learning_rate must lie in (0, 1), got {self.learning_rate}")


@dataclass(frozen=True)
class TrainedPolicy:
    """A trained model's deterministic per-state policy."""

    kind: str
    query: Callable[[DecisionState], ActionDistribution]
    iterations_trained: int
    seed: SeedSpec
    table: dict | None = None


def regret_match(cum_regret) -> ActionDistribution:
    """Positive-part normalization; uniform when no regret is positive."""
    r = np.asarray(cum_regret, dtype=np.float64)
    positive = np.where(r > 0.0, r, 0.0)
    total = positive.sum()
    if total <= 0.0:
        return ActionDistribution.uniform()
    return ActionDistribution.from_array(positive / total)


def _prepare_visits(
    states,
    g: GameParams,
    buckets: int,
    equity_already_multiway: bool,
):
    """Canonical visit order, key table, and per-visit matrices."""

    def sort_key(s: DecisionState):
        bucket = min(int(s.equity * buckets), buckets - 1)
        return (int(s.street), bucket, int(s.texture), s.players, s.equity)

    ordered = sorted(states, key=sort_key)
    keys: list[StateKey] = []
    index_of: dict[StateKey, int] = {}
    key_index = np.empty(len(ordered), dtype=np.int64)
    matrices = np.empty((len(ordered), 3, 2), dtype=np.float64)
    for v, s in enumerate(ordered):
        key = StateKey.from_state(s, buckets)
        if key not in index_of:
            index_of[key] = len(keys)
            keys.append(key)
        key_index[v] = index_of[key]
        matrices[v] = payoff_matrix(s, g, equity_already_multiway).entries
    return ordered, keys, key_index, matrices


def _strategy_table(keys, strategy_sum: np.ndarray) -> dict:
    table = {}
    for k, row in zip(keys, strategy_sum):
        total = row.sum()
        table[k] = row / total if total > 0.0 else np.full(row.shape, 1.0 / row.shape[0])
    return table


def _table_query(table: dict, buckets: int) -> Callable[[DecisionState], ActionDistribution]:
    def query(x: DecisionState) -> ActionDistribution:
        row = table.get(StateKey.from_state(x, buckets))
        if row is None:
            return ActionDistribution.uniform()
        return ActionDistribution.from_array(row)

    return query


def _check_iters(iters: int) -> None:
    if iters < 1:
        raise ValueError(f"iters must be at least 1, got {iters}")


def cfr_train(
    states,
    iters: int,
    g: GameParams = DEFAULT_GAME_PARAMS,
    seed: SeedSpec = SeedSpec(0),
    buckets: int = DEFAULT_EQUITY_BUCKETS,
    equity_already_multiway: bool = False,
) -> TrainedPolicy:
    """Full-expectation counterfactual regret minimization, both sides."""
    _check_iters(iters)
    _, keys, key_index, matrices = _prepare_visits(states, g, buckets, equity_already_multiway)
    n_keys = len(keys)
    hero_regret = np.zeros((n_keys, 3))
    hero_strategy_sum = np.zeros((n_keys, 3))
    villain_regret = np.zeros((n_keys, 2))
    villain_strategy_sum = np.zeros((n_keys, 2))
    kernels.cfr_pass(
        matrices, key_index, hero_regret, hero_strategy_sum, villain_regret, villain_strategy_sum, iters
    )
    table = _strategy_table(keys, hero_strategy_sum)
    return TrainedPolicy(
        kind="cfr",
        query=_table_query(table, buckets),
        iterations_trained=iters,
        seed=seed,
        table=table,
    )


def _chunk_sizes(iters: int, per_iter_doubles: int):
    chunk = max(1, _CHUNK_TARGET_DOUBLES // max(1, per_iter_doubles))
    done = 0
    while done < iters:
        step = min(chunk, iters - done)
        yield done, step
        done += step


def mccfr_train(
    states,
    iters: int,
    g: GameParams = DEFAULT_GAME_PARAMS,
    seed: SeedSpec = SeedSpec(0),
    buckets: int = DEFAULT_EQUITY_BUCKETS,
    equity_already_multiway: bool = False,
) -> TrainedPolicy:
    """Sampled-trajectory regret minimization.

    Per iteration and visit, one villain column and one hero row are sampled
    from the current strategies; each side's regrets update from its single
    realized opposing branch, an update whose expectation equals cfr_train's
    full one.
    """
    _check_iters(iters)
    _, keys, key_index, matrices = _prepare_visits(states, g, buckets, equity_already_multiway)
    n_keys = len(keys)
    n_visits = len(key_index)
    hero_regret = np.zeros((n_keys, 3))
    hero_strategy_sum = np.zeros((n_keys, 3))
    villain_regret = np.zeros((n_keys, 2))
    villain_strategy_sum = np.zeros((n_keys, 2))
    rng = seed.stream(MCCFR_STREAM_ID)
    for _start, step in _chunk_sizes(iters, n_visits * 2):
        uniforms = rng.random((step, n_visits, 2))
        kernels.mccfr_pass(
            matrices,
            key_index,
            hero_regret,
            hero_strategy_sum,
            villain_regret,
            villain_strategy_sum,
            uniforms,
        )
    table = _strategy_table(keys, hero_strategy_sum)
    return TrainedPolicy(
        kind="mccfr",
        query=_table_query(table, buckets),
        iterations_trained=iters,
        seed=seed,
        table=table,
    )


def nfsp_train(
    states,
    iters: int,
    g: GameParams = DEFAULT_GAME_PARAMS,
    n: NfspParams = NfspParams(),
    a: ApproximatorSpec = ApproximatorSpec(),
    seed: SeedSpec = SeedSpec(0),
    buckets: int = DEFAULT_EQUITY_BUCKETS,
    equity_already_multiway: bool = False,
) -> TrainedPolicy:
    """Fictitious self-play: temporal-difference action values plus an
    average policy of the actions taken on best-response steps.

    a is accepted for interface parity with the approximator-based variant;
    the tabular best response needs none of its fields.
    """
    _check_iters(iters)
    _, keys, key_index, matrices = _prepare_visits(states, g, buckets, equity_already_multiway)
    n_keys = len(keys)
    n_visits = len(key_index)
    hero_q = np.zeros((n_keys, 3))
    hero_counts = np.zeros((n_keys, 3))
    villain_q = np.zeros((n_keys, 2))
    villain_counts = np.zeros((n_keys, 2))
    rng = seed.stream(NFSP_STREAM_ID)
    for start, step in _chunk_sizes(iters, n_visits * 4):
        uniforms = rng.random((step, n_visits, 4))
        kernels.nfsp_pass(
            matrices,
            key_index,
            hero_q,
            hero_counts,
            villain_q,
            villain_counts,
            uniforms,
            n.anticipatory,
            n.rl_learning_rate,
            n.epsilon_explore,
            n.epsilon_final,
            start,
            iters,
        )
    table = _strategy_table(keys, hero_counts)
    return TrainedPolicy(
        kind="nfsp",
        query=_table_query(table, buckets),
        iterations_trained=iters,
        seed=seed,
        table=table,
    )


def random_policy() -> TrainedPolicy:
    """Uniform over the three actions, everywhere."""
    return TrainedPolicy(
        kind="random",
        query=lambda x: ActionDistribution.uniform(),
        iterations_trained=0,
        seed=SeedSpec(0),
        table=None,
    )
