"""Seeded Monte-Carlo evaluation and the benchmark runner.

Trial ``i`` of a run with seed ``s`` reads the counter-based stream
``(s, i)`` (see :mod:`stochmatch.rng`).  Trials are simulated in chunks,
optionally on a thread pool (the compiled kernels release the GIL), and
per-trial results are reassembled in trial order before any reduction, so
serial and parallel runs give bit-identical numbers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bipartite, general, online
from .instance import Instance, load
from .lp import solve_lp_bip, solve_lp_gen, solve_lp_onl
from .oracle import MAX_POLICY_EDGES, optimal_policy_value
from .policy import Policy
from .rng import trial_uniforms
from .transcript import TrialRecords

CHUNK = 8192
Z95 = 1.96

ALGORITHMS = (
    "alg1", "alg2", "greedy", "hybrid", "main", "general", "general-hybrid",
    "online-half", "online-bigsmall", "online-combined", "online-greedy",
)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int

    @classmethod
    def from_samples(cls, values: np.ndarray, seed: int) -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = len(values)
        if n < 2:
            raise ValueError("an estimate needs at least 2 trials")
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(n))
        return cls(mean, se, mean - Z95 * se, mean + Z95 * se, n, seed)


def build_policy(
    algorithm: str,
    instance: Instance,
    delta: Optional[float] = None,
    beta: str = "estimate",
    epsilon: float = 0.1,
) -> Policy:
    """Prepare ``algorithm`` on ``instance``; ``delta`` defaults per algorithm."""
    if algorithm == "alg1":
        return bipartite.alg1_policy(instance)
    if algorithm == "alg2":
        return bipartite.alg2_policy(instance)
    if algorithm == "greedy":
        return bipartite.greedy_policy(instance)
    if algorithm == "hybrid":
        return bipartite.hybrid_policy(instance, 0.6 if delta is None else delta)
    if algorithm == "main":
        return bipartite.main_policy(instance)
    if algorithm == "general":
        return general.general_policy(instance)
    if algorithm == "general-hybrid":
        return general.general_hybrid_policy(instance, 0.558 if delta is None else delta)
    if algorithm.startswith("online-"):
        mode = algorithm[len("online-"):]
        cfg = online.OnlineConfig(mode=mode, delta=0.74 if delta is None else delta, epsilon=epsilon, beta=beta)
        return online.online_policy(instance, cfg)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")


def simulate(policy: Policy, trials: int, seed: int, workers: int = 1, chunk: int = CHUNK) -> TrialRecords:
    """Run trials ``0..trials-1``; the result does not depend on ``workers`` or ``chunk``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    width = max(policy.width, 1)
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]

    def one(b):
        return policy.run(trial_uniforms(seed, b[0], b[1], width))

    if workers <= 1 or len(bounds) == 1:
        parts = [one(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, bounds))
    return TrialRecords.concat(parts)


def monte_carlo(policy: Policy, instance: Instance, trials: int, seed: int, workers: int = 1) -> Estimate:
    """Estimate of the policy's expected matched weight on ``instance``."""
    if trials < 2:
        raise ValueError("monte_carlo needs at least 2 trials")
    return Estimate.from_samples(simulate(policy, trials, seed, workers).profit, seed)


def edge_estimates(indicator: np.ndarray, seed: int) -> list[Estimate]:
    return [Estimate.from_samples(indicator[:, e], seed) for e in range(indicator.shape[1])]


def estimate_edge_probe_probabilities(
    policy: Policy, instance: Instance, trials: int, seed: int, workers: int = 1
) -> list[Estimate]:
    """Per-edge probability that the edge is really probed."""
    if trials < 2:
        raise ValueError("need at least 2 trials")
    rec = simulate(policy, trials, seed, workers)
    return edge_estimates(rec.probed.astype(float), seed)


@dataclass(frozen=True)
class ConditionalRate:
    """Pr[probed | considered] for one edge, with a binomial standard error."""

    rate: float
    stderr: float
    count: int


def conditional_probe_rates(records: TrialRecords) -> list[ConditionalRate]:
    considered = records.considered.sum(axis=0)
    probed = records.probed.sum(axis=0)
    out = []
    for c, k in zip(considered.tolist(), probed.tolist()):
        if c == 0:
            out.append(ConditionalRate(float("nan"), float("nan"), 0))
            continue
        r = k / c
        out.append(ConditionalRate(r, math.sqrt(max(r * (1 - r), 0.0) / c), c))
    return out


# ----------------------------------------------------------- benchmarks


def reference_lp(instance: Instance) -> float:
    if instance.is_online:
        return solve_lp_onl(instance).objective
    if instance.is_bipartite:
        return solve_lp_bip(instance).objective
    return solve_lp_gen(instance).objective


@dataclass(frozen=True)
class BenchmarkRow:
    instance: str
    algorithm: str
    lp_value: float
    estimate: Estimate
    opt_value: Optional[float]
    ratio_lp: float
    ratio_opt: Optional[float]
    threshold: float
    reference: str
    passed: bool
    note: str = ""

    def flat(self) -> dict:
        d = asdict(self)
        est = d.pop("estimate")
        for k in ("mean", "stderr", "ci_low", "ci_high", "trials", "seed"):
            d[k] = est[k]
        return {k: d[k] for k in ROW_FIELDS}


ROW_FIELDS = (
    "instance", "algorithm", "trials", "seed", "mean", "stderr", "ci_low", "ci_high",
    "lp_value", "opt_value", "ratio_lp", "ratio_opt", "threshold", "reference", "passed", "note",
)


def load_suite(path) -> tuple[list[dict], Path]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    cells = doc.get("cells", []) if isinstance(doc, dict) else doc
    if not isinstance(cells, list):
        raise ValueError("suite 'cells' must be a list")
    return cells, path.parent


def run_cell(cell: dict, base_dir: Path = Path("."), workers: int = 1) -> BenchmarkRow:
    inst_path = Path(cell["instance"])
    if not inst_path.is_absolute():
        inst_path = base_dir / inst_path
    if not inst_path.exists():
        raise FileNotFoundError(f"instance file not found: {inst_path}")
    instance = load(inst_path)
    algorithm = cell["algorithm"]
    trials = int(cell.get("trials", 10000))
    seed = int(cell.get("seed", 0))
    threshold = float(cell.get("threshold", 0.0))
    reference = cell.get("reference", "lp")
    if reference not in ("lp", "oracle"):
        raise ValueError(f"reference must be 'lp' or 'oracle', got {reference!r}")
    policy = build_policy(algorithm, instance, cell.get("delta"), cell.get("beta", "estimate"),
                          float(cell.get("epsilon", 0.1)))
    est = monte_carlo(policy, instance, trials, seed, workers)
    lp_value = reference_lp(instance)
    opt = None
    note = ""
    if instance.n_edges <= MAX_POLICY_EDGES and not instance.is_online:
        opt = optimal_policy_value(instance)
    elif reference == "oracle":
        note = "oracle-unavailable"
    ref_value = opt if (reference == "oracle" and opt is not None) else lp_value
    passed = est.mean >= threshold * ref_value - 3.0 * est.stderr
    ratio_lp = est.mean / lp_value if lp_value > 0 else float("nan")
    ratio_opt = (est.mean / opt if opt > 0 else float("nan")) if opt is not None else None
    return BenchmarkRow(instance.name or inst_path.stem, algorithm, lp_value, est, opt, ratio_lp, ratio_opt,
                        threshold, reference, bool(passed), note)


def run_benchmark(cells: Sequence[dict], base_dir=Path("."), workers: int = 1) -> list[BenchmarkRow]:
    return [run_cell(c, Path(base_dir), workers) for c in cells]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        if math.isnan(v):
            return None
        return float(f"{v:.12g}")
    return v


def format_records(rows: Sequence[dict], fields: Sequence[str], fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps([{k: _json_value(r[k]) for k in fields} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt(r[k]) for k in fields])
    return buf.getvalue()


def format_rows(rows: Sequence[BenchmarkRow], fmt: str = "csv") -> str:
    return format_records([r.flat() for r in rows], ROW_FIELDS, fmt)


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
