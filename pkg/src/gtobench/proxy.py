"""Closed-form reference strategies.

The heads-up policy hinges raise weight on equity above an aggression
threshold and fold weight on equity below a passivity threshold, with a
constant call weight, then rescales per street and board texture. The
multiway variant replaces equity with the probability of beating every
remaining opponent and tightens both thresholds per extra opponent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ActionDistribution,
    ConfigError,
    DecisionState,
    HeadsUpState,
    MultiwayState,
    STREETS,
    Street,
    TEXTURES,
    Texture,
)

# (call_mult, raise_mult, fold_mult) per street, indexed by Street order:
# looser calling early, polarized raising and folding on the river.
DEFAULT_STREET_ADJUST = (
    (1.2, 1.0, 0.9),
    (1.1, 1.0, 1.0),
    (1.0, 1.0, 1.0),
    (0.8, 1.2, 1.2),
)
# Raise damped on paired boards, boosted on draw-heavy ones.
DEFAULT_TEXTURE_ADJUST = (
    (1.0, 1.0, 1.0),
    (1.0, 0.85, 1.0),
    (1.0, 1.0, 1.0),
    (1.0, 1.1, 1.0),
    (1.0, 1.1, 1.0),
    (1.0, 0.85, 1.0),
)


@dataclass(frozen=True)
class ProxyParams:
    """Shape parameters of the closed-form policy.

    street_adjust and texture_adjust hold one (call_mult, raise_mult,
    fold_mult) triple per category, indexed by enum order.
    """

    raise_slope: float = 3.0
    raise_threshold: float = 0.55
    fold_slope: float = 3.0
    fold_threshold: float = 0.45
    call_base_weight: float = 1.0
    street_adjust: tuple = DEFAULT_STREET_ADJUST
    texture_adjust: tuple = DEFAULT_TEXTURE_ADJUST
    multiway_tighten_per_player: float = 0.02

    def __post_init__(self) -> None:
        if self.call_base_weight <= 0:
            raise ConfigError(f"call_base_weight must be positive, got {self.call_base_weight}")
        if self.raise_slope < 0 or self.fold_slope < 0:
            raise ConfigError("hinge slopes must be non-negative")
        if self.fold_threshold > self.raise_threshold:
            raise ConfigError(
                f"fold_threshold {self.fold_threshold} exceeds raise_threshold {self.raise_threshold}"
            )
        if self.multiway_tighten_per_player < 0:
            raise ConfigError("multiway_tighten_per_player must be non-negative")
        for name, table, size in (
            ("street_adjust", self.street_adjust, len(STREETS)),
            ("texture_adjust", self.texture_adjust, len(TEXTURES)),
        ):
            if len(table) != size:
                raise ConfigError(f"{name} needs {size} triples, got {len(table)}")
            for triple in table:
                if len(triple) != 3 or any(m <= 0 for m in triple):
                    raise ConfigError(f"{name} entries must be positive triples, got {triple}")


DEFAULT_PROXY_PARAMS = ProxyParams()


def multiway_equity(e: float, k: int) -> float:
    """Probability of beating k - 1 independent opponents, each won with
    probability e."""
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"equity must lie in [0, 1], got {e}")
    if k < 2:
        raise ValueError(f"player count must be at least 2, got {k}")
    return float(e) ** (k - 1)


def _hinge_weights(
    e: float,
    street: Street,
    texture: Texture,
    p: ProxyParams,
    raise_threshold: float,
    fold_threshold: float,
) -> np.ndarray:
    w = np.array(
        [
            p.call_base_weight,
            max(0.0, p.raise_slope * (e - raise_threshold)),
            max(0.0, p.fold_slope * (fold_threshold - e)),
        ]
    )
    w *= np.asarray(p.street_adjust[int(street)], dtype=np.float64)
    w *= np.asarray(p.texture_adjust[int(texture)], dtype=np.float64)
    return w


def headsup_proxy(x: DecisionState, p: ProxyParams = DEFAULT_PROXY_PARAMS) -> ActionDistribution:
    """Closed-form heads-up policy for one state."""
    if x.players != 2:
        raise MultiwayState(f"heads-up proxy needs players=2, got {x.players}")
    w = _hinge_weights(x.equity, x.street, x.texture, p, p.raise_threshold, p.fold_threshold)
    return ActionDistribution.from_weights(w)


def multiway_proxy(
    x: DecisionState,
    p: ProxyParams = DEFAULT_PROXY_PARAMS,
    equity_already_multiway: bool = False,
) -> ActionDistribution:
    """Closed-form policy against x.players - 1 opponents.

    equity_already_multiway marks states whose equity field is already the
    multiway win probability (Monte-Carlo generated), skipping the power
    transform; threshold tightening still applies.
    """
    if x.players == 2:
        raise HeadsUpState("multiway proxy needs players >= 3; use headsup_proxy")
    e = x.equity if equity_already_multiway else multiway_equity(x.equity, x.players)
    tighten = p.multiway_tighten_per_player * (x.players - 2)
    w = _hinge_weights(
        e, x.street, x.texture, p, p.raise_threshold + tighten, p.fold_threshold + tighten
    )
    return ActionDistribution.from_weights(w)


def proxy_policy(
    x: DecisionState,
    p: ProxyParams = DEFAULT_PROXY_PARAMS,
    equity_already_multiway: bool = False,
) -> ActionDistribution:
    """Dispatch on player count."""
    if x.players == 2:
        return headsup_proxy(x, p)
    return multiway_proxy(x, p, equity_already_multiway=equity_already_multiway)
