"""Command-line entry point.

Two commands: `run` (the default) trains and evaluates per the assembled
config, writing CSV, JSON, and markdown reports; `train-reference` builds
and stores the heads-up reference policy only. Flag precedence is
defaults < --config file < flags, with GTO_BENCH_OUT overriding the output
directory last. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import MODES, REFERENCES, ExperimentConfig, build_config, load_config_file
from .core import GtoBenchError, UsageError
from .harness import emit_report, run_experiment, train_reference

COMMANDS = ("run", "train-reference")


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on error; surface a typed error instead so
    # the caller owns the exit code.
    def error(self, message: str) -> None:
        raise UsageError(f"{message}\n{self.format_usage()}")


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw}")
    return value


def _non_negative_int(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {raw}")
    return value


def _models(raw: str) -> tuple:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


def _build_parser() -> _Parser:
    parser = _Parser(prog="gtobench", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("command", nargs="?", default="run", choices=COMMANDS,
                        help="run the benchmark (default) or only train the stored reference")
    parser.add_argument("--config", metavar="FILE", help="flat key-value config file")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--models", type=_models, metavar="M1,M2,...",
                        help="comma-separated subset of cfr,mccfr,deepcfr,nfsp,random")
    parser.add_argument("--iters", type=_positive_int)
    parser.add_argument("--seeds", type=_positive_int)
    parser.add_argument("--states", type=_positive_int, dest="eval_states",
                        help="evaluation states per seed")
    parser.add_argument("--reference", choices=REFERENCES)
    parser.add_argument("--reference-iters", type=_non_negative_int, dest="reference_iters")
    parser.add_argument("--train-states", type=_positive_int, dest="train_states",
                        help="training states per seed")
    parser.add_argument("--seed", type=_non_negative_int, dest="master_seed")
    parser.add_argument("--out", dest="output_dir", metavar="DIR")
    parser.add_argument("--verbose", action="store_true",
                        help="log per-seed RNG stream labels")
    return parser


def parse_cli(argv=None) -> tuple[str, ExperimentConfig, bool]:
    """(command, assembled config, verbose flag) from argv."""
    args = _build_parser().parse_args(argv)
    file_values = load_config_file(args.config) if args.config else None
    overrides = {
        name: getattr(args, name)
        for name in ("mode", "models", "iters", "seeds", "eval_states", "reference",
                     "reference_iters", "train_states", "master_seed", "output_dir")
    }
    return args.command, build_config(file_values, overrides), args.verbose


def main(argv=None) -> int:
    try:
        command, cfg, verbose = parse_cli(argv)
    except UsageError as exc:
        print(f"gtobench: {exc}", file=sys.stderr)
        return 1
    except GtoBenchError as exc:
        print(f"gtobench: {exc}", file=sys.stderr)
        return 2
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        if command == "train-reference":
            path = train_reference(cfg)
            print(path)
        else:
            report = run_experiment(cfg)
            for fmt in ("csv", "json", "markdown"):
                print(emit_report(report, fmt))
    except UsageError as exc:
        print(f"gtobench: {exc}", file=sys.stderr)
        return 1
    except GtoBenchError as exc:
        print(f"gtobench: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
