"""Experiment configuration.

One flat, diff-friendly key-value file format drives everything: the same
serialization is parsed from --config files, embedded in reports, and hashed
to name cached reference policies. Nested parameter groups use dotted key
prefixes (generator.street_weights = 0.4,0.3,0.2,0.1).
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields, replace

from .core import RNG_ALGORITHMS, ConfigError, IoError
from .game import GameParams
from .generator import GeneratorConfig
from .learners import ApproximatorSpec, NfspParams
from .proxy import ProxyParams

MODEL_ORDER = ("cfr", "mccfr", "deepcfr", "nfsp", "random")
MODES = ("headsup", "multiway")
REFERENCES = ("proxy", "mccfr_reference")

ENV_OUTPUT_DIR = "GTO_BENCH_OUT"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark invocation depends on.

    reference=None resolves per mode: the stored high-iteration sampled-CFR
    policy heads-up, the closed-form proxy in multiway mode (where a tabular
    heads-up reference has nothing to say).
    """

    mode: str = "headsup"
    models: tuple = MODEL_ORDER
    iters: int = 500
    eval_states: int = 2000
    train_states: int = 2000
    seeds: int = 5
    reference: str | None = None
    reference_iters: int = 200_000
    reference_per_seed: bool = False
    master_seed: int = 42
    rng_algorithm: str = "philox"
    buckets: int = 20
    output_dir: str = "gtobench_out"
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    proxy: ProxyParams = field(default_factory=ProxyParams)
    game: GameParams = field(default_factory=GameParams)
    approximator: ApproximatorSpec = field(default_factory=ApproximatorSpec)
    nfsp: NfspParams = field(default_factory=NfspParams)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.models:
            raise ConfigError("models must not be empty")
        for m in self.models:
            if m not in MODEL_ORDER:
                raise ConfigError(f"unknown model {m!r}, expected subset of {MODEL_ORDER}")
        if len(set(self.models)) != len(self.models):
            raise ConfigError(f"duplicate models in {self.models}")
        for name in ("iters", "eval_states", "train_states", "seeds", "buckets"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.reference_iters < 0:
            raise ConfigError(f"reference_iters must be >= 0, got {self.reference_iters}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.rng_algorithm not in RNG_ALGORITHMS:
            raise ConfigError(f"rng_algorithm must be one of {sorted(RNG_ALGORITHMS)}, got {self.rng_algorithm!r}")
        if self.reference is not None and self.reference not in REFERENCES:
            raise ConfigError(f"reference must be one of {REFERENCES}, got {self.reference!r}")
        if self.reference == "mccfr_reference" and self.mode == "multiway":
            raise ConfigError("mccfr_reference is a heads-up tabular policy; multiway mode requires reference=proxy")

    @property
    def resolved_reference(self) -> str:
        if self.reference is not None:
            return self.reference
        return "mccfr_reference" if self.mode == "headsup" else "proxy"

    @property
    def effective_generator(self) -> GeneratorConfig:
        # Mode, not the generator sub-config, decides the player regime.
        return replace(self.generator, headsup=self.mode == "headsup")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ";".join(",".join(_fmt(v) for v in row) for row in value)
        return ",".join(_fmt(v) for v in value)
    return str(value)


def config_to_text(cfg: ExperimentConfig) -> str:
    """Canonical flat serialization; parses back to an equivalent config
    (the mode-dependent reference default is written out resolved)."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in _SECTIONS:
            for sub in fields(value):
                if f.name == "generator" and sub.name == "headsup":
                    continue
                lines.append(f"{f.name}.{sub.name} = {_fmt(getattr(value, sub.name))}")
        elif f.name == "reference":
            lines.append(f"reference = {cfg.resolved_reference}")
        else:
            lines.append(f"{f.name} = {_fmt(value)}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(config_to_text(cfg).encode("utf-8")).hexdigest()


def reference_key_hash(cfg: ExperimentConfig, run_index: int) -> str:
    """Hash over exactly the inputs the stored reference policy depends on."""
    parts = [
        f"run_index = {run_index}",
        f"master_seed = {cfg.master_seed}",
        f"rng_algorithm = {cfg.rng_algorithm}",
        f"reference_iters = {cfg.reference_iters}",
        f"train_states = {cfg.train_states}",
        f"buckets = {cfg.buckets}",
    ]
    for section in ("generator", "game"):
        obj = getattr(cfg, section)
        for sub in fields(obj):
            if section == "generator" and sub.name == "headsup":
                continue
            parts.append(f"{section}.{sub.name} = {_fmt(getattr(obj, sub.name))}")
    digest = hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()
    return digest[:16]


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_floats(raw: str, key: str) -> tuple:
    return tuple(_parse_float(p.strip(), key) for p in raw.split(","))


def _parse_rows(raw: str, key: str) -> tuple:
    return tuple(_parse_floats(row.strip(), key) for row in raw.split(";"))


def _parse_models(raw: str, key: str) -> tuple:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


def _identity(raw: str, key: str) -> str:
    return raw


# key -> (config field or (section, field), parser)
_TOP_KEYS = {
    "mode": _identity,
    "models": _parse_models,
    "iters": _parse_int,
    "eval_states": _parse_int,
    "train_states": _parse_int,
    "seeds": _parse_int,
    "reference": _identity,
    "reference_iters": _parse_int,
    "reference_per_seed": _parse_bool,
    "master_seed": _parse_int,
    "rng_algorithm": _identity,
    "buckets": _parse_int,
    "output_dir": _identity,
}
_SECTIONS = {
    "generator": {
        "street_weights": _parse_floats,
        "equity_alpha_by_street": _parse_floats,
        "player_count_weights": _parse_floats,
        "multiway_equity_mode": _identity,
        "montecarlo_trials": _parse_int,
    },
    "proxy": {
        "raise_slope": _parse_float,
        "raise_threshold": _parse_float,
        "fold_slope": _parse_float,
        "fold_threshold": _parse_float,
        "call_base_weight": _parse_float,
        "street_adjust": _parse_rows,
        "texture_adjust": _parse_rows,
        "multiway_tighten_per_player": _parse_float,
    },
    "game": {
        "bet_by_street": _parse_floats,
        "fold_equity": _parse_float,
        "fold_cost": _parse_float,
        "texture_fold_equity_adjust": _parse_floats,
    },
    "approximator": {
        "input_width": _parse_int,
        "hidden_width": _parse_int,
        "hidden_layers": _parse_int,
        "output_width": _parse_int,
        "learning_rate": _parse_float,
        "batch_size": _parse_int,
        "buffer_capacity": _parse_int,
    },
    "nfsp": {
        "anticipatory": _parse_float,
        "rl_learning_rate": _parse_float,
        "sl_learning_rate": _parse_float,
        "epsilon_explore": _parse_float,
        "epsilon_final": _parse_float,
    },
}
_SECTION_TYPES = {
    "generator": GeneratorConfig,
    "proxy": ProxyParams,
    "game": GameParams,
    "approximator": ApproximatorSpec,
    "nfsp": NfspParams,
}


def parse_config_text(text: str) -> dict:
    """Raw key/value pairs from the flat format; values stay strings."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = raw
    return values


def load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def _typed_values(raw_values: dict) -> tuple:
    """Convert flat string values into (top-level, per-section) kwargs."""
    top: dict = {}
    sections: dict = {name: {} for name in _SECTIONS}
    for key, raw in raw_values.items():
        if "." in key:
            section, _, sub = key.partition(".")
            if section not in _SECTIONS or sub not in _SECTIONS[section]:
                raise ConfigError(f"unknown config key {key!r}")
            sections[section][sub] = _SECTIONS[section][sub](raw, key)
        else:
            if key not in _TOP_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            top[key] = _TOP_KEYS[key](raw, key)
    return top, sections


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Assemble a validated config: defaults, then file, then overrides,
    then the GTO_BENCH_OUT environment variable for the output directory."""
    top, sections = _typed_values(file_values or {})
    kwargs = dict(top)
    for name, cls in _SECTION_TYPES.items():
        if sections[name]:
            kwargs[name] = cls(**sections[name])
    for key, value in (overrides or {}).items():
        if value is not None:
            kwargs[key] = value
    env_out = os.environ.get(ENV_OUTPUT_DIR)
    if env_out:
        kwargs["output_dir"] = env_out
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
