"""General graphs: random bipartition reduction and the Greedy hybrid.

The fractional solution comes from the timeout LP with odd-set cuts.  Each
trial splits the vertex set by fair coins, keeps only the crossing edges
and runs the bipartite rounding-and-ordering machinery on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bipartite import _attenuation, alg1_records, alg1_width, greedy_policy
from .instance import Instance
from .lp import FractionalSolution, solve_lp_gen, split_large_small
from .policy import Policy
from .rng import uniforms_from
from .transcript import ProbeTranscript

H_AT_ZERO = 1.0 - math.exp(-1.0)
H_AT_ONE = 0.5


def h_factor(p):
    return _attenuation(p, 1.0, H_AT_ZERO, H_AT_ONE)


@dataclass(frozen=True)
class Bipartition:
    side_a: frozenset
    side_b: frozenset
    crossing: tuple[int, ...]  # edge ids
    x: Optional[np.ndarray] = None  # x restricted to crossing edges (zero elsewhere)


def _bipartition_from(instance: Instance, u: np.ndarray, x=None) -> Bipartition:
    side = u[: len(instance.vertices)] < 0.5
    a = frozenset(v for v, s in zip(instance.vertices, side) if s)
    b = frozenset(instance.vertices) - a
    arr = instance.arrays
    cross = side[arr.eu] != side[arr.ev]
    xr = None if x is None else np.where(cross, np.asarray(x, dtype=float), 0.0)
    return Bipartition(a, b, tuple(int(e) for e in np.flatnonzero(cross)), xr)


def split_vertices(instance: Instance, rng, x=None) -> Bipartition:
    """Independent fair coin per vertex; slot layout matches the trial kernel."""
    return _bipartition_from(instance, uniforms_from(rng, len(instance.vertices)), x)


def general_policy(instance: Instance, lp: Optional[FractionalSolution] = None) -> Policy:
    lp = solve_lp_gen(instance) if lp is None else lp
    x = lp.x
    info = {"lp_value": lp.objective, "x": x, "cuts": lp.cuts}
    width = alg1_width(instance, split=True)
    return Policy("general", width, lambda U: alg1_records(instance, x, U, split=True), info)


def choose_general_hybrid(gamma: float, delta: float) -> str:
    if gamma * delta >= gamma / 4.0 + h_factor(delta) * (1.0 - gamma) / 2.0:
        return "GREEDY"
    return "ALG1"


def general_hybrid_policy(instance: Instance, delta: float = 0.558) -> Policy:
    lp = solve_lp_gen(instance)
    summary = split_large_small(instance, lp.x, delta)
    pick = choose_general_hybrid(summary.gamma, delta)
    inner = greedy_policy(instance) if pick == "GREEDY" else general_policy(instance, lp)
    info = {"lp_value": lp.objective, "x": lp.x, "cuts": lp.cuts, "summary": summary, "choice": pick}
    return Policy("general-hybrid", inner.width, inner.run, info)


def run_general(instance: Instance, rng, lp: Optional[FractionalSolution] = None) -> ProbeTranscript:
    return general_policy(instance, lp).single(rng)


def run_general_hybrid(instance: Instance, delta: float, rng) -> ProbeTranscript:
    return general_hybrid_policy(instance, delta).single(rng)


def general_ratio_function(delta: float) -> float:
    hd = h_factor(delta)
    return delta * hd / (2.0 * delta + hd - 0.5)
