"""Offline bipartite algorithms: ALG1, ALG2, Greedy, Hybrid(delta) and MAIN."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .instance import Instance
from .lp import FractionalSolution, solve_lp_bip, split_large_small
from .oracle import greedy_matching
from .policy import Policy
from .transcript import ProbeTranscript, TrialRecords

G_AT_ZERO = (1.0 - math.exp(-2.0)) / 2.0
G_AT_ONE = 1.0 / 3.0


def _attenuation(p, k: float, at_zero: float, at_one: float):
    """(1 - (1-p)^((k+p)/p)) / (k+p) with its limits at p = 0 and p = 1."""
    p_arr = np.asarray(p, dtype=np.float64)
    if np.any((p_arr < 0) | (p_arr > 1)):
        raise ValueError("probability must lie in [0, 1]")
    inner = np.clip(p_arr, 1e-300, 1.0 - 1e-16)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = (k + inner) / inner * np.log1p(-inner)
        val = -np.expm1(expo) / (k + inner)
    val = np.where(p_arr == 0.0, at_zero, np.where(p_arr == 1.0, at_one, val))
    return float(val) if np.ndim(p) == 0 else val


def g_factor(p):
    """Lower bound on Pr[e safe | e rounded in] for an edge of probability p."""
    return _attenuation(p, 2.0, G_AT_ZERO, G_AT_ONE)


def sample_probe_time(p: float, u: float) -> float:
    """Inverse-CDF draw of an edge's probe time: Pr[Y <= y] = (1 - exp(-p y)) / p."""
    if not 0.0 < p <= 1.0:
        raise ValueError("probe times need 0 < p <= 1")
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if p == 1.0 and u == 1.0:
        return math.inf
    return -math.log1p(-p * u) / p


def probe_time_support(p: float) -> float:
    return math.inf if p >= 1.0 else -math.log1p(-p) / p


@dataclass(frozen=True)
class ProbeOrder:
    times: dict  # edge id -> Y_e

    def order(self) -> list[int]:
        """Ascending probe time, ties by edge id."""
        return sorted(self.times, key=lambda e: (self.times[e], e))


def probe_order(instance: Instance, edges, u) -> ProbeOrder:
    """Probe times for ``edges``; ``u`` holds one uniform per edge id."""
    p = instance.p
    return ProbeOrder({int(e): sample_probe_time(float(p[e]), float(u[e])) for e in edges})


# ------------------------------------------------------------------ batches


def alg1_records(instance: Instance, x: np.ndarray, U: np.ndarray, split: bool = False) -> TrialRecords:
    arr = instance.arrays
    rec = TrialRecords.empty(len(U), instance.n_edges)
    kernels.alg1_trials(arr.n_vertices, arr.eu, arr.ev, arr.p, arr.w, np.asarray(x, dtype=np.float64),
                        arr.adj_ptr, arr.adj_edge, split, U, rec.status, rec.rank, rec.profit)
    return rec


def alg1_width(instance: Instance, split: bool = False) -> int:
    return 3 * instance.n_edges + (len(instance.vertices) if split else 0)


def alg2_records(instance: Instance, x: np.ndarray, U: np.ndarray) -> TrialRecords:
    arr = instance.arrays
    rec = TrialRecords.empty(len(U), instance.n_edges)
    kernels.alg2_trials(arr.n_vertices, arr.eu, arr.ev, arr.p, arr.w, np.asarray(x, dtype=np.float64),
                        arr.adj_ptr, arr.adj_edge, U, rec.status, rec.rank, rec.profit)
    return rec


def fixed_set_records(instance: Instance, chosen: np.ndarray, U: np.ndarray) -> TrialRecords:
    rec = TrialRecords.empty(len(U), instance.n_edges)
    kernels.fixed_set_trials(instance.p, instance.w, np.asarray(chosen, dtype=np.bool_), U,
                             rec.status, rec.rank, rec.profit)
    return rec


def _require_bipartite(instance: Instance) -> None:
    if not instance.is_bipartite:
        raise ValueError(f"{instance.kind} instance has no bipartition")


# ------------------------------------------------------------------ policies


def alg1_policy(instance: Instance, x: Optional[np.ndarray] = None) -> Policy:
    _require_bipartite(instance)
    lp = solve_lp_bip(instance) if x is None else None
    x = lp.x if x is None else np.asarray(x, dtype=float)
    info = {"lp_value": lp.objective if lp else float(np.sum(instance.w * instance.p * x)), "x": x}
    return Policy("alg1", alg1_width(instance), lambda U: alg1_records(instance, x, U), info)


def alg2_policy(instance: Instance, x: Optional[np.ndarray] = None) -> Policy:
    _require_bipartite(instance)
    lp = solve_lp_bip(instance) if x is None else None
    x = lp.x if x is None else np.asarray(x, dtype=float)
    info = {"lp_value": lp.objective if lp else float(np.sum(instance.w * instance.p * x)), "x": x}
    return Policy("alg2", 2 * instance.n_edges, lambda U: alg2_records(instance, x, U), info)


def greedy_policy(instance: Instance) -> Policy:
    chosen = np.zeros(instance.n_edges, dtype=np.bool_)
    matching = greedy_matching(instance)
    chosen[matching] = True
    info = {"matching": matching, "expected": float(np.sum((instance.w * instance.p)[chosen]))}
    return Policy("greedy", instance.n_edges, lambda U: fixed_set_records(instance, chosen, U), info)


@dataclass(frozen=True)
class AlgoChoice:
    algorithm: str  # "ALG1" | "ALG2" | "GREEDY"
    bound_first: float
    bound_second: float
    delta: Optional[float] = None
    gamma: Optional[float] = None


def choose_hybrid(gamma: float, delta: float) -> str:
    """GREEDY when its guarantee gamma*delta meets ALG1's; ties go to GREEDY."""
    if gamma * delta >= gamma / 3.0 + g_factor(delta) * (1.0 - gamma):
        return "GREEDY"
    return "ALG1"


def choose_main(instance: Instance, x) -> AlgoChoice:
    x = np.asarray(x, dtype=float)
    wpx = instance.w * instance.p * x
    b1 = float(np.sum(wpx * g_factor(instance.p)))
    b2 = float(np.sum(wpx * instance.p))
    return AlgoChoice("ALG1" if b1 >= b2 else "ALG2", b1, b2)


def hybrid_policy(instance: Instance, delta: float = 0.6) -> Policy:
    _require_bipartite(instance)
    lp = solve_lp_bip(instance)
    summary = split_large_small(instance, lp.x, delta)
    pick = choose_hybrid(summary.gamma, delta)
    greedy_bound = summary.gamma * delta * summary.lp_value
    alg1_bound = (summary.gamma / 3.0 + g_factor(delta) * (1 - summary.gamma)) * summary.lp_value
    inner = greedy_policy(instance) if pick == "GREEDY" else alg1_policy(instance, lp.x)
    choice = AlgoChoice(pick, alg1_bound, greedy_bound, delta, summary.gamma)
    info = {"lp_value": lp.objective, "x": lp.x, "choice": choice, "summary": summary}
    return Policy("hybrid", inner.width, inner.run, info)


def main_policy(instance: Instance) -> Policy:
    _require_bipartite(instance)
    lp = solve_lp_bip(instance)
    choice = choose_main(instance, lp.x)
    inner = alg1_policy(instance, lp.x) if choice.algorithm == "ALG1" else alg2_policy(instance, lp.x)
    info = {"lp_value": lp.objective, "x": lp.x, "choice": choice}
    return Policy("main", inner.width, inner.run, info)


# --------------------------------------------------------------- single runs


def run_alg1(instance: Instance, x, rng) -> ProbeTranscript:
    return alg1_policy(instance, x).single(rng)


def run_alg2(instance: Instance, x, rng) -> ProbeTranscript:
    return alg2_policy(instance, x).single(rng)


def run_greedy(instance: Instance, rng=0) -> ProbeTranscript:
    return greedy_policy(instance).single(rng)


def run_main(instance: Instance, rng) -> ProbeTranscript:
    return main_policy(instance).single(rng)


def run_hybrid(instance: Instance, delta: float, rng) -> ProbeTranscript:
    return hybrid_policy(instance, delta).single(rng)


# ---------------------------------------------------------------- constants


def bip_hybrid_ratio(delta: float) -> float:
    """Worst case of Hybrid(delta) over gamma."""
    gd = g_factor(delta)
    return delta * gd / (delta + gd - 1.0 / 3.0)


def main_worst_case_ratio() -> float:
    """g(0) / (1 + g(0) - g(1)), equal to (3e^2 - 3) / (7e^2 - 3)."""
    return G_AT_ZERO / (1.0 + G_AT_ZERO - G_AT_ONE)


def lp_bip(instance: Instance) -> FractionalSolution:
    return solve_lp_bip(instance)
