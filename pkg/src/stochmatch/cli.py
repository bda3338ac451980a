"""Command-line interface: ``stochmatch <command> [options]``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import harness
from .bipartite import bip_hybrid_ratio, g_factor, main_worst_case_ratio
from .general import general_ratio_function, h_factor
from .instance import GeneratorParams, InstanceFormatError, generate, load, serialize
from .lp import build_lp_bip, build_lp_match, build_lp_onl, lp_gen_problem, solve_lp, solve_lp_gen
from .online import PER_EDGE_FLOOR, online_ratio_function
from .oracle import MAX_POLICY_EDGES, max_weight_matching, optimal_policy_value
from .rounding import gkps_round_many, levelset_round_many


class UsageError(Exception):
    pass


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _range(text: str, cast=float) -> tuple:
    try:
        parts = tuple(cast(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from exc
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    return parts


def _prob_spec(text: str) -> tuple:
    kind, _, rest = text.partition(":")
    try:
        vals = tuple(float(v) for v in rest.split(":")) if rest else ()
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad probability spec {text!r}") from exc
    if kind == "uniform" and len(vals) == 2:
        return ("uniform", *vals)
    if kind == "two-point" and len(vals) == 3:
        return ("two-point", *vals)
    raise argparse.ArgumentTypeError("use uniform:lo:hi or two-point:small:large:frac")


def _load(path: str):
    if not Path(path).exists():
        raise UsageError(f"no such instance file: {path}")
    return load(path)


# ------------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    params = GeneratorParams(
        kind=args.kind, n_left=args.left, n_right=args.right, n_vertices=args.vertices,
        density=args.density, prob=args.prob, weights=args.weights, timeouts=args.timeouts,
        seed=args.seed, rounds=args.rounds,
    )
    try:
        inst = generate(params, args.name)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(serialize(inst), args.out)
    return 0


def _lp_for(inst, which: str):
    if which == "auto":
        which = "onl" if inst.is_online else ("bip" if inst.is_bipartite else "gen")
    if which == "gen":
        sol = solve_lp_gen(inst)
        return lp_gen_problem(inst, sol.cuts), sol
    builder = {"bip": build_lp_bip, "match": build_lp_match, "onl": build_lp_onl}[which]
    problem = builder(inst)
    return problem, solve_lp(problem)


def cmd_lp(args) -> int:
    inst = _load(args.instance)
    problem, sol = _lp_for(inst, args.which)
    if args.listing:
        _emit(problem.to_text(), args.out)
        return 0
    rows = [{"edge": e.id, "u": e.u, "v": e.v, "p": e.p, "w": e.w, "x": float(sol.x[e.id])} for e in inst.edges]
    text = harness.format_records(rows, ("edge", "u", "v", "p", "w", "x"), args.format)
    if args.format == "csv":
        text += f"# objective,{sol.objective:.12g}\n"
    _emit(text, args.out)
    return 0


def cmd_round(args) -> int:
    inst = _load(args.instance)
    _, sol = _lp_for(inst, "auto")
    x = sol.x
    if inst.is_online:
        oa = inst.online_arrays
        freq = np.zeros(inst.n_edges)
        for b in range(oa.n_types):
            cols = oa.eid[:, b]
            freq[cols] = levelset_round_many(x[cols], args.trials, args.seed + b).mean(axis=0)
    elif inst.is_bipartite:
        idx = inst.index
        pairs = [(idx[e.u], idx[e.v]) for e in inst.edges]
        freq = gkps_round_many(pairs, x, args.trials, args.seed).mean(axis=0)
    else:
        raise UsageError("round needs a bipartite or online instance")
    rows = [{"edge": e, "x": float(x[e]), "frequency": float(freq[e])} for e in range(inst.n_edges)]
    _emit(harness.format_records(rows, ("edge", "x", "frequency"), args.format), args.out)
    return 0


def cmd_run(args) -> int:
    inst = _load(args.instance)
    try:
        policy = harness.build_policy(args.algo, inst, args.delta, args.beta, args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.trials < 2:
        raise UsageError("--trials must be at least 2")
    rec = harness.simulate(policy, args.trials, args.seed, args.workers)
    if args.per_trial:
        lines = ["trial,edge,probed,matched,profit"]
        probed, matched = rec.probed, rec.matched
        for i in range(rec.trials):
            pr = f"{rec.profit[i]:.12g}"
            for e in range(inst.n_edges):
                lines.append(f"{i},{e},{int(probed[i, e])},{int(matched[i, e])},{pr}")
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    est = harness.Estimate.from_samples(rec.profit, args.seed)
    row = {"instance": inst.name, "algorithm": args.algo, "lp_value": policy.info.get("lp_value"),
           **{k: getattr(est, k) for k in ("mean", "stderr", "ci_low", "ci_high", "trials", "seed")}}
    fields = ("instance", "algorithm", "trials", "seed", "mean", "stderr", "ci_low", "ci_high", "lp_value")
    _emit(harness.format_records([row], fields, args.format), args.out)
    return 0


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    row = {"instance": inst.name, "edges": inst.n_edges, "lp_value": harness.reference_lp(inst)}
    row["opt_value"] = optimal_policy_value(inst) if inst.n_edges <= MAX_POLICY_EDGES else None
    pairs = [(e.u, e.v) for e in inst.edges]
    m = max_weight_matching(pairs, inst.w * inst.p, inst.bipartition)
    row["greedy_matching"] = " ".join(str(e) for e in m)
    row["greedy_value"] = float(np.sum((inst.w * inst.p)[m])) if m else 0.0
    fields = ("instance", "edges", "lp_value", "opt_value", "greedy_matching", "greedy_value")
    _emit(harness.format_records([row], fields, args.format), args.out)
    return 0


def cmd_bench(args) -> int:
    try:
        cells, base = harness.load_suite(args.suite)
    except FileNotFoundError as exc:
        raise UsageError(f"no such suite file: {args.suite}") from exc
    for c in cells:
        if args.trials_override:
            c["trials"] = args.trials
    rows = harness.run_benchmark(cells, base, args.workers)
    _emit(harness.format_rows(rows, args.format), args.out)
    return 0 if all(r.passed for r in rows) else 1


def cmd_constants(args) -> int:
    lines = ["p,g,h"]
    for p in np.linspace(0.0, 1.0, args.steps + 1):
        lines.append(f"{p:.4g},{g_factor(p):.12g},{h_factor(p):.12g}")
    lines += [
        "",
        "constant,value",
        f"main_worst_case_ratio,{main_worst_case_ratio():.12g}",
        f"bip_hybrid_ratio(0.6),{bip_hybrid_ratio(0.6):.12g}",
        f"general_ratio_function(0.558),{general_ratio_function(0.558):.12g}",
        f"online_ratio_function(0.74),{online_ratio_function(0.74):.12g}",
        f"online_per_edge_floor,{PER_EDGE_FLOOR:.12g}",
        f"g(0),{(1 - math.exp(-2)) / 2:.12g}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument("--trials", type=int, default=10000, help="Monte-Carlo trials (default 10000)")
    common.add_argument("--delta", type=float, default=None, help="large/small threshold")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--workers", type=int, default=1, help="worker threads for simulation")

    parser = argparse.ArgumentParser(prog="stochmatch", description="Stochastic matching with timeouts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a random instance")
    p.add_argument("--kind", choices=("offline-bipartite", "offline-general", "online"), default="offline-bipartite")
    p.add_argument("--left", type=int, default=3)
    p.add_argument("--right", type=int, default=3)
    p.add_argument("--vertices", type=int, default=6)
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--prob", type=_prob_spec, default=("uniform", 0.05, 1.0),
                   help="uniform:lo:hi or two-point:small:large:frac")
    p.add_argument("--weights", type=_range, default=(0.5, 2.0))
    p.add_argument("--timeouts", type=lambda s: _range(s, int), default=(1, 3))
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--name", default="")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("lp", parents=[common], help="solve the LP relaxation of an instance")
    p.add_argument("instance")
    p.add_argument("--which", choices=("auto", "bip", "match", "gen", "onl"), default="auto")
    p.add_argument("--listing", action="store_true", help="print the constraint listing instead")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("round", parents=[common], help="empirical marginals of dependent rounding")
    p.add_argument("instance")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("run", parents=[common], help="Monte-Carlo evaluation of one algorithm")
    p.add_argument("instance")
    p.add_argument("--algo", required=True, choices=harness.ALGORITHMS)
    p.add_argument("--beta", choices=("estimate", "exact"), default="estimate")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--per-trial", action="store_true", help="emit trial,edge,probed,matched,profit rows")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", parents=[common], help="exact optimum and max-weight matching")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", parents=[common], help="run a benchmark suite")
    p.add_argument("suite")
    p.add_argument("--trials-override", action="store_true", help="replace each cell's trials with --trials")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("constants", parents=[common], help="attenuation tables and ratio constants")
    p.add_argument("--steps", type=int, default=10)
    p.set_defaults(func=cmd_constants)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, InstanceFormatError) as exc:
        print(f"stochmatch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
