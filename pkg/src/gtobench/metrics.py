"""Policy-distance metrics, robustness gap, and cross-seed intervals.

All information measures are in nats. Probabilities are clamped below at
1e-9 inside logarithms, never renormalized, which keeps every measure finite
while leaving exact zeros as genuine zero weights. Per-state values are
reduced in list order so sums are bit-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ActionDistribution, EmptyEvalSet, TooFewRuns
from .game import (
    DEFAULT_GAME_PARAMS,
    GameParams,
    best_response_value,
    payoff_matrix,
    solve_equilibrium_detailed,
)
from .learners import TrainedPolicy

PROB_CLAMP = 1e-9


def top1_agreement(p: ActionDistribution, q: ActionDistribution) -> int:
    """1 when both argmaxes coincide under canonical-order tie-breaking."""
    return 1 if p.argmax_action() == q.argmax_action() else 0


def kl_divergence(p: ActionDistribution, q: ActionDistribution) -> float:
    """Sum of p(a) ln(p(a)/q(a)); zero-probability p components contribute
    nothing, and both operands are clamped at 1e-9 inside the ratio."""
    total = 0.0
    for pa, qa in zip(p.as_tuple(), q.as_tuple()):
        if pa == 0.0:
            continue
        total += pa * math.log(max(pa, PROB_CLAMP) / max(qa, PROB_CLAMP))
    return total


def cross_entropy(q: ActionDistribution, p: ActionDistribution) -> float:
    """Minus the q-weighted log of p, p clamped at 1e-9."""
    total = 0.0
    for qa, pa in zip(q.as_tuple(), p.as_tuple()):
        if qa == 0.0:
            continue
        total -= qa * math.log(max(pa, PROB_CLAMP))
    return total


def entropy(q: ActionDistribution) -> float:
    """Shannon entropy with the same clamping convention."""
    total = 0.0
    for qa in q.as_tuple():
        if qa == 0.0:
            continue
        total -= qa * math.log(max(qa, PROB_CLAMP))
    return total


def nashconv_heuristic(
    policy: TrainedPolicy,
    states,
    g: GameParams = DEFAULT_GAME_PARAMS,
    equity_already_multiway: bool = False,
) -> float:
    """Mean shortfall of the policy's guaranteed value below the oracle
    equilibrium value, each state's game solved exactly."""
    states = list(states)
    if not states:
        raise EmptyEvalSet("nashconv needs at least one evaluation state")
    total = 0.0
    for s in states:
        m = payoff_matrix(s, g, equity_already_multiway)
        _, value, _ = solve_equilibrium_detailed(m)
        sigma = policy.query(s).as_array()
        total += value - best_response_value(sigma, m)
    return total / len(states)


def confidence_interval(values) -> tuple[float, float]:
    """Mean and 95% halfwidth (1.96 sd / sqrt(n), sample sd)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size < 2:
        raise TooFewRuns(f"confidence interval needs at least 2 values, got {arr.size}")
    mean = float(arr.mean())
    halfwidth = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, halfwidth


@dataclass(frozen=True)
class MetricRow:
    """One aggregated result line; serializes to the report CSV schema."""

    mode: str
    players: int
    model: str
    iters: int
    top1: float
    top1_ci: float
    top1_delta: float
    kl: float
    kl_ci: float
    kl_delta: float
    ce: float
    ce_ci: float
    ce_delta: float
    nashconv: float
    n_states: int
    seeds: int

    CSV_HEADER = (
        "mode,players,model,iters,top1,top1_ci,top1_delta,"
        "kl,kl_ci,kl_delta,ce,ce_ci,ce_delta,nashconv,n_states,seeds"
    )

    def to_csv_row(self) -> str:
        def num(v: float) -> str:
            return f"{v:.10g}"

        return ",".join(
            [
                self.mode,
                str(self.players),
                self.model,
                str(self.iters),
                num(self.top1),
                num(self.top1_ci),
                num(self.top1_delta),
                num(self.kl),
                num(self.kl_ci),
                num(self.kl_delta),
                num(self.ce),
                num(self.ce_ci),
                num(self.ce_delta),
                num(self.nashconv),
                str(self.n_states),
                str(self.seeds),
            ]
        )
