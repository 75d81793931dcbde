"""Self-play strategy benchmark on synthetic poker decision states."""

__version__ = "0.1.0"

from .core import (
    ACTIONS,
    ActionDistribution,
    ConfigError,
    DecisionState,
    GtoBenchError,
    SeedSpec,
    Street,
    Texture,
    validate_distribution,
)
from .generator import GeneratorConfig, estimate_street_weights, sample_state, sample_states
from .proxy import ProxyParams, proxy_policy
from .game import GameParams, PayoffMatrix, payoff_matrix, solve_equilibrium_detailed
from .learners import (
    ApproximatorSpec,
    NfspParams,
    TrainedPolicy,
    cfr_train,
    mccfr_train,
    nfsp_train,
    random_policy,
    regret_match,
)
from .deepcfr import deepcfr_train
from .metrics import (
    MetricRow,
    confidence_interval,
    cross_entropy,
    entropy,
    kl_divergence,
    nashconv_heuristic,
    top1_agreement,
)
from .config import ExperimentConfig, build_config, config_hash, config_to_text
from .harness import EvalReport, emit_report, run_experiment, train_reference

__all__ = [
    "ACTIONS",
    "ActionDistribution",
    "ApproximatorSpec",
    "ConfigError",
    "DecisionState",
    "EvalReport",
    "ExperimentConfig",
    "GameParams",
    "GeneratorConfig",
    "GtoBenchError",
    "MetricRow",
    "NfspParams",
    "PayoffMatrix",
    "ProxyParams",
    "SeedSpec",
    "Street",
    "Texture",
    "TrainedPolicy",
    "__version__",
    "build_config",
    "cfr_train",
    "config_hash",
    "config_to_text",
    "confidence_interval",
    "cross_entropy",
    "deepcfr_train",
    "emit_report",
    "entropy",
    "estimate_street_weights",
    "kl_divergence",
    "mccfr_train",
    "nashconv_heuristic",
    "nfsp_train",
    "payoff_matrix",
    "proxy_policy",
    "random_policy",
    "regret_match",
    "run_experiment",
    "sample_state",
    "sample_states",
    "solve_equilibrium_detailed",
    "top1_agreement",
    "train_reference",
    "validate_distribution",
]
