"""Timing comparison of the compiled and pure-numpy kernel backends.

Usage:
    python benchmarks/bench_kernels.py [--iters N] [--states N] [--repeats N]

The backend is fixed at import time by GTO_BENCH_NUMBA, so this script
spawns itself once per backend, times each training kernel on an identical
workload, checks that both backends produced bit-identical strategy tables,
and prints the speedups.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

ENV_FLAG = "GTO_BENCH_NUMBA"


def _workload(iters: int, n_states: int) -> dict:
    import numpy as np

    from gtobench.backend import backend_name
    from gtobench.core import SeedSpec
    from gtobench.generator import GeneratorConfig, sample_states
    from gtobench.learners import cfr_train, mccfr_train, nfsp_train

    states = sample_states(GeneratorConfig(headsup=False), SeedSpec(2024).stream(0), n_states)
    trainers = {
        "cfr": lambda: cfr_train(states, iters),
        "mccfr": lambda: mccfr_train(states, iters, seed=SeedSpec(2025)),
        "nfsp": lambda: nfsp_train(states, iters, seed=SeedSpec(2026)),
    }
    # First call pays any compilation cost; exclude it from the timings.
    for build in trainers.values():
        build()
    digest = hashlib.sha256()
    timings = {}
    for name, build in trainers.items():
        start = time.perf_counter()
        policy = build()
        timings[name] = time.perf_counter() - start
        for key in sorted(policy.table, key=lambda k: k.as_tuple()):
            digest.update(np.ascontiguousarray(policy.table[key]).tobytes())
    return {"backend": backend_name(), "timings": timings, "digest": digest.hexdigest()}


def _spawn(flag_value: str, args: argparse.Namespace) -> dict:
    env = dict(os.environ)
    env[ENV_FLAG] = flag_value
    cmd = [
        sys.executable, os.path.abspath(__file__), "--worker",
        "--iters", str(args.iters), "--states", str(args.states),
    ]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=20_000)
    parser.add_argument("--states", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(_workload(args.iters, args.states)))
        return 0

    print(f"workload: {args.states} states, {args.iters} iterations, best of {args.repeats}")
    results = {}
    for flag, label in (("1", "numba"), ("0", "numpy")):
        best = None
        for _ in range(args.repeats):
            result = _spawn(flag, args)
            if result["backend"] != label:
                print(f"error: expected backend {label}, worker reports {result['backend']}")
                return 1
            if best is None:
                best = result
            else:
                for k, v in result["timings"].items():
                    best["timings"][k] = min(best["timings"][k], v)
        results[label] = best

    if results["numba"]["digest"] != results["numpy"]["digest"]:
        print("error: backends disagree; strategy tables are not bit-identical")
        return 1

    print(f"{'kernel':<8} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    for name in results["numba"]["timings"]:
        a = results["numba"]["timings"][name]
        b = results["numpy"]["timings"][name]
        print(f"{name:<8} {a:>9.3f}s {b:>9.3f}s {b / a:>8.1f}x")
    print("strategy tables bit-identical across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())
