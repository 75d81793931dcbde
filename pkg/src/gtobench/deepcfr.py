"""Regret and policy approximators with analytic gradients.

A small rectifier MLP stands in for each tabular structure: the regret net
regresses exact per-state counterfactual regrets under squared error, the
policy net fits the regret-matched strategies under cross-entropy after a
softmax. Training samples flow through reservoir buffers so late iterations
do not dominate. Everything is plain numpy; gradients are derived by hand
and checked against finite differences in the test suite.
"""
from __future__ import annotations

import numpy as np

from .core import ActionDistribution, ConfigError, DecisionState, SeedSpec
from .game import DEFAULT_GAME_PARAMS, GameParams
from .learners import (
    DEEPCFR_STREAM_ID,
    DEFAULT_EQUITY_BUCKETS,
    ApproximatorSpec,
    TrainedPolicy,
    _check_iters,
    _prepare_visits,
    regret_match,
)

FEATURE_WIDTH = 12


def featurize(x: DecisionState) -> np.ndarray:
    """Street one-hot, equity scalar, texture one-hot, scaled opponent count."""
    f = np.zeros(FEATURE_WIDTH)
    f[int(x.street)] = 1.0
    f[4] = x.equity
    f[5 + int(x.texture)] = 1.0
    f[11] = (x.players - 2) / 4.0
    return f


class Mlp:
    """Rectifier network; the final layer starts at zero so the untrained
    policy is exactly uniform after softmax."""

    def __init__(self, spec: ApproximatorSpec, rng: np.random.Generator):
        widths = [spec.input_width] + [spec.hidden_width] * spec.hidden_layers + [spec.output_width]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for layer, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
            if layer == len(widths) - 2:
                w = np.zeros((fan_in, fan_out))
            else:
                scale = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-scale, scale, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return h @ self.weights[-1] + self.biases[-1]

    def _forward_cached(self, x: np.ndarray):
        activations = [x]
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
            activations.append(h)
        return activations, activations[-1] @ self.weights[-1] + self.biases[-1]

    def backward(self, activations: list[np.ndarray], grad_out: np.ndarray):
        """Gradients of a scalar loss given d loss / d output."""
        grads_w = [np.empty(0)] * len(self.weights)
        grads_b = [np.empty(0)] * len(self.biases)
        g = grad_out
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w[layer] = activations[layer].T @ g
            grads_b[layer] = g.sum(axis=0)
            if layer > 0:
                g = (g @ self.weights[layer].T) * (activations[layer] > 0.0)
        return grads_w, grads_b

    def apply_step(self, grads_w, grads_b, lr: float) -> None:
        for w, gw in zip(self.weights, grads_w):
            w -= lr * gw
        for b, gb in zip(self.biases, grads_b):
            b -= lr * gb

    def get_params(self) -> list[np.ndarray]:
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def set_params(self, params) -> None:
        flat = list(params)
        self.weights = [np.array(flat[i], dtype=np.float64) for i in range(0, len(flat), 2)]
        self.biases = [np.array(flat[i], dtype=np.float64) for i in range(1, len(flat), 2)]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def mse_loss_and_grads(net: Mlp, x: np.ndarray, targets: np.ndarray):
    """Mean over batch and components of squared prediction error."""
    activations, pred = net._forward_cached(x)
    diff = pred - targets
    loss = float((diff * diff).sum() / diff.size)
    grad_out = 2.0 * diff / diff.size
    return loss, net.backward(activations, grad_out)


def ce_loss_and_grads(net: Mlp, x: np.ndarray, targets: np.ndarray):
    """Mean cross-entropy between target distributions and softmax output."""
    activations, logits = net._forward_cached(x)
    p = softmax(logits)
    batch = x.shape[0]
    loss = float(-(targets * np.log(np.maximum(p, 1e-300))).sum() / batch)
    grad_out = (p - targets) / batch
    return loss, net.backward(activations, grad_out)


class ReservoirBuffer:
    """Uniform sample over everything ever added, capped at capacity."""

    def __init__(self, capacity: int, width: int):
        self.capacity = capacity
        self.features = np.empty((capacity, FEATURE_WIDTH))
        self.targets = np.empty((capacity, width))
        self.size = 0
        self.n_seen = 0

    def add(self, feature: np.ndarray, target: np.ndarray, rng: np.random.Generator) -> None:
        self.n_seen += 1
        if self.size < self.capacity:
            self.features[self.size] = feature
            self.targets[self.size] = target
            self.size += 1
            return
        slot = int(rng.integers(0, self.n_seen))
        if slot < self.capacity:
            self.features[slot] = feature
            self.targets[slot] = target

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=batch_size)
        return self.features[idx], self.targets[idx]


def deepcfr_train(
    states,
    iters: int,
    g: GameParams = DEFAULT_GAME_PARAMS,
    a: ApproximatorSpec = ApproximatorSpec(),
    seed: SeedSpec = SeedSpec(0),
    buckets: int = DEFAULT_EQUITY_BUCKETS,
    equity_already_multiway: bool = False,
) -> TrainedPolicy:
    """Each iteration visits one sampled state: the regret net's current
    prediction fixes hero's strategy, exact counterfactual regrets against
    the tabular villain feed the regret buffer, the played strategy feeds the
    policy buffer, and both nets take one mini-batch gradient step."""
    _check_iters(iters)
    if a.input_width != FEATURE_WIDTH:
        raise ConfigError(f"input_width must equal {FEATURE_WIDTH} for this featurizer")
    if a.output_width != 3:
        raise ConfigError("output_width must equal 3 hero actions")
    ordered, keys, key_index, matrices = _prepare_visits(states, g, buckets, equity_already_multiway)
    n_visits = len(ordered)
    if n_visits == 0:
        raise ValueError("deepcfr needs at least one training state")
    features = np.stack([featurize(s) for s in ordered])
    rng = seed.stream(DEEPCFR_STREAM_ID)
    regret_net = Mlp(a, rng)
    policy_net = Mlp(a, rng)
    regret_buffer = ReservoirBuffer(a.buffer_capacity, 3)
    policy_buffer = ReservoirBuffer(a.buffer_capacity, 3)
    villain_regret = np.zeros((len(keys), 2))

    for _t in range(iters):
        v = int(rng.integers(0, n_visits))
        k = key_index[v]
        m = matrices[v]
        phi = features[v]

        predicted = regret_net.forward(phi[None, :])[0]
        sigma_h = regret_match(predicted).as_array()
        positive = np.maximum(villain_regret[k], 0.0)
        vtot = positive.sum()
        sigma_v = positive / vtot if vtot > 0.0 else np.full(2, 0.5)

        u_h = m @ sigma_v
        instant_regret = u_h - sigma_h @ u_h
        regret_buffer.add(phi, instant_regret, rng)
        policy_buffer.add(phi, sigma_h, rng)

        u_v = -(sigma_h @ m)
        villain_regret[k] += u_v - sigma_v @ u_v

        bx, bt = regret_buffer.sample(a.batch_size, rng)
        _, (gw, gb) = mse_loss_and_grads(regret_net, bx, bt)
        regret_net.apply_step(gw, gb, a.learning_rate)

        bx, bt = policy_buffer.sample(a.batch_size, rng)
        _, (gw, gb) = ce_loss_and_grads(policy_net, bx, bt)
        policy_net.apply_step(gw, gb, a.learning_rate)

    def query(x: DecisionState) -> ActionDistribution:
        p = softmax(policy_net.forward(featurize(x)[None, :])[0])
        return ActionDistribution.from_array(p)

    return TrainedPolicy(
        kind="deepcfr",
        query=query,
        iterations_trained=iters,
        seed=seed,
        table=None,
    )
