"""Time the numba kernels against the pure-Python fallback.

    python3 benchmarks/compare_backends.py [--trials 2000] [--repeat 3]

The backend is fixed at import time by ``STOCHMATCH_NO_NUMBA``, so each
backend is measured in its own child process.  Compilation happens during a
warm-up call and is not included in the timings.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = (
    ("alg1", "bip-6x6-s0"),
    ("alg2", "bip-6x6-s0"),
    ("greedy", "bip-6x6-s0"),
    ("general", "gen-10-s7"),
    ("online-half", "online-5x5-s0"),
)


def measure(trials: int, repeat: int) -> dict:
    from stochmatch import backend_name
    from stochmatch.corpus import load_corpus
    from stochmatch.harness import build_policy, simulate
    from stochmatch.lp import solve_lp_bip
    from stochmatch.rounding import gkps_round_many

    corpus = {i.name: i for i in load_corpus()}
    timings = {}
    for algo, name in WORKLOADS:
        policy = build_policy(algo, corpus[name], beta="exact")
        simulate(policy, 8, 0)
        best = min(_timed(lambda: simulate(policy, trials, 1)) for _ in range(repeat))
        timings[f"{algo} on {name}"] = best

    inst = corpus["bip-6x6-s0"]
    idx = inst.index
    pairs = [(idx[e.u], idx[e.v]) for e in inst.edges]
    x = inst.p * solve_lp_bip(inst).x
    gkps_round_many(pairs, x, 8, 0)
    timings["gkps rounding on bip-6x6-s0"] = min(
        _timed(lambda: gkps_round_many(pairs, x, trials, 1)) for _ in range(repeat))
    return {"backend": backend_name(), "timings": timings}


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def _child(no_numba: bool, trials: int, repeat: int) -> dict:
    env = dict(os.environ, STOCHMATCH_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run(
        [sys.executable, __file__, "--child", "--trials", str(trials), "--repeat", str(repeat)],
        env=env, check=True, capture_output=True, text=True,
    )
    return json.loads(out.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(measure(args.trials, args.repeat)))
        return

    fast = _child(False, args.trials, args.repeat)
    slow = _child(True, args.trials, args.repeat)
    print(f"{args.trials} trials, best of {args.repeat}")
    print(f"{'workload':34s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>9s}")
    for key, t_fast in fast["timings"].items():
        t_slow = slow["timings"][key]
        print(f"{key:34s} {t_fast:9.4f}s {t_slow:9.4f}s {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
