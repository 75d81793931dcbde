"""Shared domain vocabulary: streets, textures, decision states, action
distributions, seeding, and the error hierarchy used across the package.

All types here are immutable values and safe to share between workers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Canonical action order used everywhere: serialization, argmax tie-breaking,
# payoff-matrix rows, and network outputs.
ACTIONS = ("call", "raise", "fold")
CALL, RAISE, FOLD = 0, 1, 2

# Tolerance for |sum(probabilities) - 1|.
NORMALIZATION_TOL = 1e-9

MIN_PLAYERS = 2
MAX_PLAYERS = 6


class GtoBenchError(Exception):
    """Base class for every error raised by this package."""


class NotNormalized(GtoBenchError):
    """Distribution components do not sum to 1 within tolerance."""


class NegativeProbability(GtoBenchError):
    """A distribution component is below zero."""


class DegenerateCounts(GtoBenchError):
    """Street counts carry no information and no prior."""


class HeadsUpMode(GtoBenchError):
    """Multiway-only operation invoked under a heads-up configuration."""


class MultiwayState(GtoBenchError):
    """Heads-up-only operation invoked on a multiway state."""


class HeadsUpState(GtoBenchError):
    """Multiway-only operation invoked on a heads-up state."""


class ConfigError(GtoBenchError):
    """Invalid configuration value or file."""


class ReferenceMissing(GtoBenchError):
    """A stored reference policy was requested but is absent."""


class UsageError(GtoBenchError):
    """Invalid command-line invocation."""


class IoError(GtoBenchError):
    """Failed filesystem interaction while reading or writing artifacts."""


class EmptyEvalSet(GtoBenchError):
    """An evaluation operation received no states."""


class TooFewRuns(GtoBenchError):
    """Confidence intervals need at least two values."""


class EmptyReport(GtoBenchError):
    """Report emission received no rows."""


class Street(enum.IntEnum):
    """Betting stage. Integer values give the total order pre < flop < turn < river."""

    PRE = 0
    FLOP = 1
    TURN = 2
    RIVER = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Street":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ConfigError(f"unknown street label: {label!r}") from None


class Texture(enum.IntEnum):
    """Board texture category."""

    DRY = 0
    PAIRED = 1
    TWO_TONE = 2
    MONOTONE = 3
    STRAIGHTY = 4
    PAIRED_TWO_TONE = 5

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Texture":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ConfigError(f"unknown texture label: {label!r}") from None


STREETS = tuple(Street)
TEXTURES = tuple(Texture)


@dataclass(frozen=True)
class DecisionState:
    """One synthetic decision point.

    equity is the hero's win probability against a single opponent; multiway
    operations derive the effective multiway value from it unless the state
    was generated with an already-multiway equity estimate.
    """

    street: Street
    equity: float
    texture: Texture
    players: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.equity <= 1.0:
            raise ValueError(f"equity must lie in [0, 1], got {self.equity}")
        if self.players < MIN_PLAYERS or self.players > MAX_PLAYERS:
            raise ValueError(f"players must lie in [2, 6], got {self.players}")


@dataclass(frozen=True)
class ActionDistribution:
    """Probability triple over the canonical action order [call, raise, fold]."""

    p_call: float
    p_raise: float
    p_fold: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_call, self.p_raise, self.p_fold], dtype=np.float64)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_call, self.p_raise, self.p_fold)

    def argmax_action(self) -> int:
        """Index of the most likely action; ties resolve to the earliest
        action in canonical order."""
        best = 0
        if self.p_raise > self.p_call:
            best = 1
        probs = (self.p_call, self.p_raise, self.p_fold)
        if self.p_fold > probs[best]:
            best = 2
        return best

    @classmethod
    def from_array(cls, values, validate: bool = True) -> "ActionDistribution":
        d = cls(float(values[0]), float(values[1]), float(values[2]))
        return validate_distribution(d) if validate else d

    @classmethod
    def uniform(cls) -> "ActionDistribution":
        return cls(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    @classmethod
    def from_weights(cls, weights) -> "ActionDistribution":
        """Normalize non-negative weights into a distribution."""
        w = np.asarray(weights, dtype=np.float64)
        total = float(w.sum())
        if total <= 0.0:
            raise NegativeProbability(f"weights must have positive mass, got {w}")
        return cls.from_array(w / total)


def validate_distribution(d: ActionDistribution) -> ActionDistribution:
    """Return d unchanged if it is a valid probability triple.

    Raises NegativeProbability if any component is below zero, then
    NotNormalized if the components do not sum to 1 within 1e-9.
    """
    for name, value in (("call", d.p_call), ("raise", d.p_raise), ("fold", d.p_fold)):
        if value < 0.0:
            raise NegativeProbability(f"{name} probability is negative: {value}")
    total = d.p_call + d.p_raise + d.p_fold
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"components sum to {total!r}, expected 1 within {NORMALIZATION_TOL}")
    return d


# Supported bit generators. Philox is the default: counter based, so streams
# derived from (master_seed, spawn_key) are reproducible across machines.
RNG_ALGORITHMS = {
    "philox": np.random.Philox,
    "pcg64": np.random.PCG64,
}
DEFAULT_RNG_ALGORITHM = "philox"


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one independent RNG stream family.

    Distinct (master_seed, run_index) pairs, and distinct stream ids under the
    same pair, yield statistically independent streams.
    """

    master_seed: int
    run_index: int = 0
    algorithm: str = DEFAULT_RNG_ALGORITHM

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.run_index < 0:
            raise ValueError(f"run_index must be non-negative, got {self.run_index}")
        if self.algorithm not in RNG_ALGORITHMS:
            raise ConfigError(f"unknown rng algorithm: {self.algorithm!r}")

    def stream(self, *stream_ids: int, algorithm: str | None = None) -> np.random.Generator:
        """Derive the generator for one labeled stream."""
        resolved = self.algorithm if algorithm is None else algorithm
        if resolved not in RNG_ALGORITHMS:
            raise ConfigError(f"unknown rng algorithm: {resolved!r}")
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.run_index, *stream_ids))
        return np.random.Generator(RNG_ALGORITHMS[resolved](seq))
