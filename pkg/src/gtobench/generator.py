"""Synthetic decision-state sampling and street-weight estimation.

Streets follow configurable categorical weights, equity follows a symmetric
Beta per street (realized as a ratio of two Gamma draws so any shape works),
textures are uniform over the six categories, and multiway player counts
follow their own categorical weights. All draws consume a caller-supplied
numpy Generator, one stream per worker; there is no shared mutable state.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    DecisionState,
    DegenerateCounts,
    HeadsUpMode,
    NORMALIZATION_TOL,
    STREETS,
    Street,
    TEXTURES,
    Texture,
)

DEFAULT_STREET_WEIGHTS = (0.4, 0.3, 0.2, 0.1)
# Symmetric Beta shape per street, indexed by Street order.
DEFAULT_EQUITY_ALPHAS = (8.0, 6.0, 4.0, 3.0)
# Weights over player counts 3, 4, 5, 6.
DEFAULT_PLAYER_COUNT_WEIGHTS = (0.45, 0.30, 0.15, 0.10)

MULTIWAY_EQUITY_MODES = ("transform", "montecarlo")


@dataclass(frozen=True)
class GeneratorConfig:
    """Distributional knobs for state sampling.

    multiway_equity_mode selects how multiway states carry equity:
      - "transform": equity stays the single-opponent value; downstream
        consumers raise it to the (players - 1) power themselves.
      - "montecarlo": equity is replaced at sampling time by a Monte-Carlo
        frequency of beating players - 1 independent opponents; downstream
        consumers must then use it as-is.
    """

    street_weights: tuple[float, float, float, float] = DEFAULT_STREET_WEIGHTS
    equity_alpha_by_street: tuple[float, float, float, float] = DEFAULT_EQUITY_ALPHAS
    player_count_weights: tuple[float, float, float, float] = DEFAULT_PLAYER_COUNT_WEIGHTS
    headsup: bool = True
    multiway_equity_mode: str = "transform"
    montecarlo_trials: int = 200

    def __post_init__(self) -> None:
        for name, weights in (
            ("street_weights", self.street_weights),
            ("player_count_weights", self.player_count_weights),
        ):
            if len(weights) != 4:
                raise ConfigError(f"{name} needs 4 entries, got {len(weights)}")
            if any(w < 0 for w in weights):
                raise ConfigError(f"{name} must be non-negative, got {weights}")
            if abs(sum(weights) - 1.0) > NORMALIZATION_TOL:
                raise ConfigError(f"{name} must sum to 1 within {NORMALIZATION_TOL}, got {weights}")
        if len(self.equity_alpha_by_street) != 4:
            raise ConfigError("equity_alpha_by_street needs one shape per street")
        if any(a <= 0 for a in self.equity_alpha_by_street):
            raise ConfigError(f"equity alphas must be positive, got {self.equity_alpha_by_street}")
        if self.multiway_equity_mode not in MULTIWAY_EQUITY_MODES:
            raise ConfigError(f"multiway_equity_mode must be one of {MULTIWAY_EQUITY_MODES}")
        if self.montecarlo_trials < 1:
            raise ConfigError("montecarlo_trials must be at least 1")


@dataclass(frozen=True)
class StreetCounts:
    """Observed hand counts per street plus a symmetric smoothing prior."""

    n_pre: int
    n_flop: int
    n_turn: int
    n_river: int
    prior_alpha: float = 1.0

    def __post_init__(self) -> None:
        counts = (self.n_pre, self.n_flop, self.n_turn, self.n_river)
        if any(c < 0 for c in counts):
            raise ValueError(f"counts must be non-negative, got {counts}")
        if self.prior_alpha < 0:
            raise ValueError(f"prior_alpha must be non-negative, got {self.prior_alpha}")

    @property
    def total(self) -> int:
        return self.n_pre + self.n_flop + self.n_turn + self.n_river


def estimate_street_weights(counts: StreetCounts) -> np.ndarray:
    """Smoothed, normalized street incidences.

    Each street gets (n_s + alpha) / (N + 4 alpha), then the four smoothed
    incidences are renormalized so they sum to 1 within 1e-12.
    """
    n = np.array([counts.n_pre, counts.n_flop, counts.n_turn, counts.n_river], dtype=np.float64)
    total = n.sum()
    alpha = counts.prior_alpha
    if total == 0 and alpha == 0:
        raise DegenerateCounts("all counts are zero and prior_alpha is zero")
    smoothed = (n + alpha) / (total + 4.0 * alpha)
    return smoothed / smoothed.sum()


def _categorical(u: float, weights) -> int:
    """Inverse-CDF draw; consumes exactly one uniform."""
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def sample_street(cfg: GeneratorConfig, rng: np.random.Generator) -> Street:
    return STREETS[_categorical(rng.random(), cfg.street_weights)]


def sample_equity(street: Street, cfg: GeneratorConfig, rng: np.random.Generator) -> float:
    """One symmetric Beta(alpha, alpha) draw via two Gamma(alpha, 1) draws."""
    alpha = cfg.equity_alpha_by_street[int(street)]
    g1 = rng.standard_gamma(alpha)
    g2 = rng.standard_gamma(alpha)
    total = g1 + g2
    return float(g1 / total) if total > 0.0 else 0.5


def sample_texture(rng: np.random.Generator) -> Texture:
    return TEXTURES[min(int(rng.random() * 6.0), 5)]


def sample_player_count(cfg: GeneratorConfig, rng: np.random.Generator) -> int:
    if cfg.headsup:
        raise HeadsUpMode("player counts are only sampled in multiway mode")
    return 3 + _categorical(rng.random(), cfg.player_count_weights)


def _montecarlo_multiway_equity(equity: float, players: int, trials: int, rng: np.random.Generator) -> float:
    """Monte-Carlo frequency of beating players - 1 independent opponents.

    Each trial succeeds with probability equity^(players - 1); a single
    uniform per trial realizes that joint event.
    """
    target = equity ** (players - 1)
    wins = int(np.count_nonzero(rng.random(trials) < target))
    return wins / trials


def sample_state(cfg: GeneratorConfig, rng: np.random.Generator, players: int | None = None) -> DecisionState:
    """Compose one decision state.

    players forces a fixed player count (used for per-count evaluation sets);
    when omitted, heads-up configs yield 2 and multiway configs draw from
    player_count_weights.
    """
    street = sample_street(cfg, rng)
    equity = sample_equity(street, cfg, rng)
    texture = sample_texture(rng)
    if players is None:
        players = 2 if cfg.headsup else sample_player_count(cfg, rng)
    if players > 2 and cfg.multiway_equity_mode == "montecarlo":
        equity = _montecarlo_multiway_equity(equity, players, cfg.montecarlo_trials, rng)
    return DecisionState(street=street, equity=equity, texture=texture, players=players)


def sample_states(
    cfg: GeneratorConfig,
    rng: np.random.Generator,
    count: int,
    players: int | None = None,
) -> list[DecisionState]:
    return [sample_state(cfg, rng, players=players) for _ in range(count)]


STATE_CSV_HEADER = "street,equity,texture,players"


def states_to_csv(states) -> str:
    """Render states as CSV rows; equity keeps full round-trip precision."""
    buf = io.StringIO()
    buf.write(STATE_CSV_HEADER + "\n")
    for s in states:
        buf.write(f"{s.street.label},{s.equity:.17g},{s.texture.label},{s.players}\n")
    return buf.getvalue()
