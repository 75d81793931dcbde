"""Experiment orchestration.

Per seed: sample a training set, train every requested model on it, then
score each model on freshly sampled evaluation states against the reference
policy. Aggregation across seeds produces one row per (players, model) with
95% confidence halfwidths and per-seed improvements over the Random
baseline. Everything is keyed off labeled RNG sub-streams, so a (config,
master seed) pair pins every report byte; the JSON report alone carries
wall-clock timestamps.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODEL_ORDER, ExperimentConfig, config_hash, config_to_text, reference_key_hash
from .core import (
    ActionDistribution,
    ConfigError,
    EmptyReport,
    IoError,
    ReferenceMissing,
    SeedSpec,
    Street,
    Texture,
    validate_distribution,
)
from .deepcfr import deepcfr_train
from .generator import sample_states
from .learners import (
    StateKey,
    TrainedPolicy,
    cfr_train,
    mccfr_train,
    nfsp_train,
    random_policy,
)
from .metrics import (
    MetricRow,
    confidence_interval,
    cross_entropy,
    entropy,
    kl_divergence,
    nashconv_heuristic,
    top1_agreement,
)
from .proxy import proxy_policy

logger = logging.getLogger(__name__)

# Stream ids under one (master_seed, run_index); learners use 2..4 internally.
STREAM_TRAIN = 0
STREAM_EVAL = 1
# Run index reserved for the shared reference policy, far above any seed index.
REFERENCE_RUN_INDEX = 0xFFFFFFFF

MULTIWAY_PLAYER_COUNTS = (3, 4, 5, 6)
GIBBS_SLACK = 1e-12

REFERENCE_FILE_HEADER = "street,equity_bucket,texture,players,p_call,p_raise,p_fold"


@dataclass(frozen=True)
class EvalReport:
    """All result rows plus the provenance needed to rerun them."""

    rows: tuple
    metadata: dict

    def __post_init__(self) -> None:
        seen = set()
        for row in self.rows:
            pair = (row.players, row.model)
            if pair in seen:
                raise ValueError(f"duplicate (players, model) row: {pair}")
            seen.add(pair)
            if row.model == "random":
                if row.top1_delta != 0.0 or row.kl_delta != 0.0 or row.ce_delta != 0.0:
                    raise ValueError("the random baseline's improvement over itself must be zero")

    @property
    def delta_rows(self) -> tuple:
        return tuple(
            {
                "players": row.players,
                "model": row.model,
                "top1_delta": row.top1_delta,
                "kl_delta": row.kl_delta,
                "ce_delta": row.ce_delta,
            }
            for row in self.rows
        )


def _train_model(model: str, states, cfg: ExperimentConfig, spec: SeedSpec, already: bool) -> TrainedPolicy:
    if model == "cfr":
        return cfr_train(states, cfg.iters, g=cfg.game, seed=spec, buckets=cfg.buckets,
                         equity_already_multiway=already)
    if model == "mccfr":
        return mccfr_train(states, cfg.iters, g=cfg.game, seed=spec, buckets=cfg.buckets,
                           equity_already_multiway=already)
    if model == "nfsp":
        return nfsp_train(states, cfg.iters, g=cfg.game, n=cfg.nfsp, a=cfg.approximator,
                          seed=spec, buckets=cfg.buckets, equity_already_multiway=already)
    if model == "deepcfr":
        return deepcfr_train(states, cfg.iters, g=cfg.game, a=cfg.approximator, seed=spec,
                             buckets=cfg.buckets, equity_already_multiway=already)
    if model == "random":
        return random_policy()
    raise ConfigError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# Reference policy storage


def reference_path(cfg: ExperimentConfig, run_index: int = REFERENCE_RUN_INDEX) -> Path:
    return Path(cfg.output_dir) / "reference" / f"{reference_key_hash(cfg, run_index)}.csv"


def _reference_body(policy: TrainedPolicy, buckets: int) -> str:
    lines = [REFERENCE_FILE_HEADER]
    for key in sorted(policy.table, key=StateKey.as_tuple):
        p = policy.table[key]
        lines.append(
            f"{key.street.label},{key.equity_bucket},{key.texture.label},{key.players},"
            f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}"
        )
    return "\n".join(lines) + "\n"


def train_reference(cfg: ExperimentConfig, run_index: int = REFERENCE_RUN_INDEX) -> Path:
    """Train the high-iteration sampled-CFR reference and store it by hash."""
    if cfg.mode != "headsup":
        raise ConfigError("the tabular reference is heads-up only")
    if cfg.reference_iters < 1:
        raise ConfigError("reference_iters must be >= 1 to train a reference")
    spec = SeedSpec(cfg.master_seed, run_index, algorithm=cfg.rng_algorithm)
    logger.info("reference: run_index=%d stream=train", run_index)
    states = sample_states(cfg.effective_generator, spec.stream(STREAM_TRAIN), cfg.train_states)
    policy = mccfr_train(states, cfg.reference_iters, g=cfg.game, seed=spec, buckets=cfg.buckets)
    body = _reference_body(policy, cfg.buckets)
    header = [
        "# reference policy (tabular average strategy)",
        f"# key = {reference_key_hash(cfg, run_index)}",
        f"# master_seed = {cfg.master_seed}",
        f"# run_index = {run_index}",
        f"# rng_algorithm = {cfg.rng_algorithm}",
        f"# reference_iters = {cfg.reference_iters}",
        f"# train_states = {cfg.train_states}",
        f"# buckets = {cfg.buckets}",
        f"# sha256 = {hashlib.sha256(body.encode('utf-8')).hexdigest()}",
    ]
    path = reference_path(cfg, run_index)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(header) + "\n" + body)
    except OSError as exc:
        raise IoError(f"cannot write reference file {path}: {exc}") from exc
    return path


def load_reference(path: Path, buckets: int) -> TrainedPolicy:
    """Read a stored reference, verifying its embedded content hash."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read reference file {path}: {exc}") from exc
    meta = {}
    body_lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition(" = ")
            if value:
                meta[key] = value
        elif line:
            body_lines.append(line)
    body = "\n".join(body_lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if meta.get("sha256") != digest:
        raise IoError(f"reference file {path} is corrupt: content hash mismatch")
    if body_lines[0] != REFERENCE_FILE_HEADER:
        raise IoError(f"reference file {path} has an unexpected column header")
    table = {}
    for line in body_lines[1:]:
        street, bucket, texture, players, c, r, f = line.split(",")
        key = StateKey(
            street=Street.from_label(street),
            equity_bucket=int(bucket),
            texture=Texture.from_label(texture),
            players=int(players),
        )
        dist = np.array([float(c), float(r), float(f)])
        validate_distribution(ActionDistribution.from_array(dist, validate=False))
        table[key] = dist
    spec = SeedSpec(int(meta["master_seed"]), int(meta["run_index"]),
                    algorithm=meta.get("rng_algorithm", "philox"))

    def query(x) -> ActionDistribution:
        row = table.get(StateKey.from_state(x, buckets))
        if row is None:
            return ActionDistribution.uniform()
        return ActionDistribution.from_array(row, validate=False)

    return TrainedPolicy(
        kind="mccfr_reference",
        query=query,
        iterations_trained=int(meta["reference_iters"]),
        seed=spec,
        table=table,
    )


def _ensure_reference(cfg: ExperimentConfig, run_index: int) -> TrainedPolicy:
    path = reference_path(cfg, run_index)
    if not path.exists():
        if cfg.reference_iters == 0:
            raise ReferenceMissing(
                f"no stored reference at {path} and reference_iters=0 forbids training one"
            )
        train_reference(cfg, run_index)
    return load_reference(path, cfg.buckets)


# ---------------------------------------------------------------------------
# Experiment


def _evaluate(policy: TrainedPolicy, eval_states, ref_dists, cfg: ExperimentConfig, already: bool) -> dict:
    """Per-seed metric means for one model on one evaluation set."""
    top1 = 0.0
    kl = 0.0
    ce = 0.0
    for x, ref in zip(eval_states, ref_dists):
        model_dist = policy.query(x)
        top1 += top1_agreement(model_dist, ref)
        kl += kl_divergence(model_dist, ref)
        ce_term = cross_entropy(ref, model_dist)
        if ce_term < entropy(ref) - GIBBS_SLACK:
            raise AssertionError(
                f"Gibbs inequality violated: CE {ce_term} < H {entropy(ref)} on {x}"
            )
        ce += ce_term
    n = len(eval_states)
    nashconv = nashconv_heuristic(policy, eval_states, cfg.game, equity_already_multiway=already)
    return {"top1": top1 / n, "kl": kl / n, "ce": ce / n, "nashconv": nashconv}


def _aggregate(values) -> tuple[float, float]:
    vals = list(values)
    if len(vals) < 2:
        return float(vals[0]), 0.0
    return confidence_interval(vals)


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """Train, evaluate, and aggregate one full benchmark configuration."""
    started = datetime.datetime.now(datetime.timezone.utc)
    headsup = cfg.mode == "headsup"
    player_counts = (2,) if headsup else MULTIWAY_PLAYER_COUNTS
    ordered_models = tuple(m for m in MODEL_ORDER if m in cfg.models)
    already = (not headsup) and cfg.generator.multiway_equity_mode == "montecarlo"

    reference_desc = f"closed-form proxy (players as generated, tighten={cfg.proxy.multiway_tighten_per_player})"
    shared_reference = None
    if cfg.resolved_reference == "mccfr_reference":
        if not cfg.reference_per_seed:
            shared_reference = _ensure_reference(cfg, REFERENCE_RUN_INDEX)
        reference_desc = (
            f"sampled-CFR tabular policy, {cfg.reference_iters} iterations, "
            f"{'per-seed' if cfg.reference_per_seed else 'shared'}"
        )

    # cell metrics: (players, model) -> list over seeds of per-seed means
    cells: dict = {(k, m): [] for k in player_counts for m in ordered_models}
    random_cells: dict = {k: [] for k in player_counts}

    for run in range(cfg.seeds):
        spec = SeedSpec(cfg.master_seed, run, algorithm=cfg.rng_algorithm)
        logger.info("seed=%d stream=train spawn_key=(%d, %d)", run, run, STREAM_TRAIN)
        train_set = sample_states(cfg.effective_generator, spec.stream(STREAM_TRAIN), cfg.train_states)
        policies = {m: _train_model(m, train_set, cfg, spec, already) for m in ordered_models}
        baseline = policies.get("random", random_policy())

        if cfg.resolved_reference == "mccfr_reference":
            reference = shared_reference if shared_reference is not None else _ensure_reference(
                cfg, REFERENCE_RUN_INDEX + run
            )
            ref_query = reference.query
        else:
            ref_query = lambda x: proxy_policy(x, cfg.proxy, equity_already_multiway=already)

        for k in player_counts:
            stream_ids = (STREAM_EVAL,) if headsup else (STREAM_EVAL, k)
            logger.info("seed=%d stream=eval spawn_key=(%d, %s)", run, run, stream_ids)
            eval_set = sample_states(
                cfg.effective_generator,
                spec.stream(*stream_ids),
                cfg.eval_states,
                players=None if headsup else k,
            )
            ref_dists = [ref_query(x) for x in eval_set]
            random_cells[k].append(_evaluate(baseline, eval_set, ref_dists, cfg, already))
            for m in ordered_models:
                if m == "random":
                    cells[(k, m)].append(random_cells[k][-1])
                else:
                    cells[(k, m)].append(_evaluate(policies[m], eval_set, ref_dists, cfg, already))

    rows = []
    for k in player_counts:
        for m in ordered_models:
            per_seed = cells[(k, m)]
            rand = random_cells[k]
            top1, top1_ci = _aggregate(r["top1"] for r in per_seed)
            kl, kl_ci = _aggregate(r["kl"] for r in per_seed)
            ce, ce_ci = _aggregate(r["ce"] for r in per_seed)
            nashconv = float(np.mean([r["nashconv"] for r in per_seed]))
            if m == "random":
                top1_d = kl_d = ce_d = 0.0
            else:
                top1_d = float(np.mean([a["top1"] - b["top1"] for a, b in zip(per_seed, rand)]))
                kl_d = float(np.mean([b["kl"] - a["kl"] for a, b in zip(per_seed, rand)]))
                ce_d = float(np.mean([b["ce"] - a["ce"] for a, b in zip(per_seed, rand)]))
            rows.append(MetricRow(
                mode=cfg.mode,
                players=k,
                model=m,
                iters=0 if m == "random" else cfg.iters,
                top1=top1, top1_ci=top1_ci, top1_delta=top1_d,
                kl=kl, kl_ci=kl_ci, kl_delta=kl_d,
                ce=ce, ce_ci=ce_ci, ce_delta=ce_d,
                nashconv=nashconv,
                n_states=cfg.eval_states,
                seeds=cfg.seeds,
            ))

    finished = datetime.datetime.now(datetime.timezone.utc)
    metadata = {
        "config_hash": config_hash(cfg),
        "config": config_to_text(cfg),
        "rng_algorithm": cfg.rng_algorithm,
        "master_seed": cfg.master_seed,
        "reference": reference_desc,
        "output_dir": cfg.output_dir,
        "package_version": __version__,
        "started_utc": started.isoformat(),
        "finished_utc": finished.isoformat(),
    }
    return EvalReport(rows=tuple(rows), metadata=metadata)


# ---------------------------------------------------------------------------
# Report emission


def _markdown_table(rows) -> str:
    def fmt(value, ci=None):
        if ci is None:
            return f"{value:.4f}"
        return f"{value:.4f} ± {ci:.4f}"

    best = {
        "top1": max(r.top1 for r in rows),
        "kl": min(r.kl for r in rows),
        "ce": min(r.ce for r in rows),
        "nashconv": min(r.nashconv for r in rows),
    }
    lines = [
        "| Model | Iters | Top-1 | ΔTop-1 | KL | ΔKL | CE | ΔCE | NashConv |",
        "|---|---:|---:|---:|---:|---:|---:|---:|---:|",
    ]
    for r in rows:
        cells = [
            r.model,
            str(r.iters),
            fmt(r.top1, r.top1_ci),
            fmt(r.top1_delta),
            fmt(r.kl, r.kl_ci),
            fmt(r.kl_delta),
            fmt(r.ce, r.ce_ci),
            fmt(r.ce_delta),
            fmt(r.nashconv),
        ]
        for attr, index in (("top1", 2), ("kl", 4), ("ce", 6), ("nashconv", 8)):
            if getattr(r, attr) == best[attr]:
                cells[index] = f"**{cells[index]}**"
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines)


def _render_markdown(report: EvalReport) -> str:
    meta = report.metadata
    first = report.rows[0]
    parts = [
        "# Self-play strategy benchmark",
        "",
        f"Mode: {first.mode}. Evaluation states per seed: {first.n_states}. "
        f"Seeds: {first.seeds}. Reference: {meta['reference']}.",
        f"Master seed: {meta['master_seed']} ({meta['rng_algorithm']}). "
        f"Config hash: `{meta['config_hash'][:16]}`.",
        "",
    ]
    for players in sorted({r.players for r in report.rows}):
        group = [r for r in report.rows if r.players == players]
        parts.append(f"## {players} players")
        parts.append("")
        parts.append(_markdown_table(group))
        parts.append("")
    parts.append("Δ columns are mean per-seed improvements over the Random baseline")
    parts.append("(Top-1: model − random; KL and CE: random − model). Bold marks the")
    parts.append("best value per metric (highest Top-1, lowest KL, CE, and NashConv).")
    return "\n".join(parts) + "\n"


def _render_json(report: EvalReport) -> str:
    payload = {
        "metadata": report.metadata,
        "rows": [
            {name: getattr(r, name) for name in (
                "mode", "players", "model", "iters",
                "top1", "top1_ci", "top1_delta",
                "kl", "kl_ci", "kl_delta",
                "ce", "ce_ci", "ce_delta",
                "nashconv", "n_states", "seeds",
            )}
            for r in report.rows
        ],
        "delta_rows": list(report.delta_rows),
    }
    return json.dumps(payload, indent=2) + "\n"


def _render_csv(report: EvalReport) -> str:
    lines = [MetricRow.CSV_HEADER]
    lines.extend(r.to_csv_row() for r in report.rows)
    return "\n".join(lines) + "\n"


_FORMATS = {
    "csv": ("report.csv", _render_csv),
    "json": ("report.json", _render_json),
    "markdown": ("report.md", _render_markdown),
}


def emit_report(report: EvalReport, format: str, output_dir: str | None = None) -> Path:
    """Write one report file; returns its path."""
    if not report.rows:
        raise EmptyReport("report has no rows to emit")
    if format not in _FORMATS:
        raise ConfigError(f"unknown report format {format!r}, expected one of {sorted(_FORMATS)}")
    name, render = _FORMATS[format]
    directory = Path(output_dir if output_dir is not None else report.metadata["output_dir"])
    path = directory / name
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render(report))
    except OSError as exc:
        raise IoError(f"cannot write report file {path}: {exc}") from exc
    return path
