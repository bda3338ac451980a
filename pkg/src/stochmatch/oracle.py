"""Brute-force ground truth for small instances."""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from ._jit import USE_NUMBA
from .instance import Instance

MAX_POLICY_EDGES = 12
MAX_GENERAL_MATCHING_EDGES = 40


class PolicyState(NamedTuple):
    probed: int  # bitmask over edges
    matched: int  # bitmask over vertices

    def patience_used(self, instance: Instance) -> np.ndarray:
        arr = instance.arrays
        used = np.zeros(arr.n_vertices, dtype=np.int64)
        for e in range(instance.n_edges):
            if self.probed >> e & 1:
                used[arr.eu[e]] += 1
                used[arr.ev[e]] += 1
        return used


def _policy_value_recursive(instance: Instance) -> float:
    arr = instance.arrays
    m = instance.n_edges
    eu, ev, p, w, t = arr.eu.tolist(), arr.ev.tolist(), arr.p.tolist(), arr.w.tolist(), arr.t.tolist()

    @lru_cache(maxsize=None)
    def value(probed: int, matched: int) -> float:
        used = [0] * arr.n_vertices
        for e in range(m):
            if probed >> e & 1:
                used[eu[e]] += 1
                used[ev[e]] += 1
        best = 0.0
        for e in range(m):
            a, b = eu[e], ev[e]
            if probed >> e & 1 or matched >> a & 1 or matched >> b & 1:
                continue
            if used[a] >= t[a] or used[b] >= t[b]:
                continue
            nxt = probed | (1 << e)
            val = p[e] * (w[e] + value(nxt, matched | (1 << a) | (1 << b))) + (1 - p[e]) * value(nxt, matched)
            best = max(best, val)
        return best

    return value(0, 0)


def optimal_policy_value(instance: Instance, max_edges: int = MAX_POLICY_EDGES) -> float:
    """Expected weight of the best adaptive probing policy (query-commit, timeouts)."""
    if instance.n_edges > max_edges:
        raise ValueError(f"optimal policy search is capped at {max_edges} edges, got {instance.n_edges}")
    if instance.n_edges == 0:
        return 0.0
    if USE_NUMBA:
        arr = instance.arrays
        return float(kernels.mdp_table(arr.n_vertices, arr.eu, arr.ev, arr.p, arr.w, arr.t))
    return _policy_value_recursive(instance)


# ------------------------------------------------------------ max matching


def _bipartite_matching(n_left_ids, n_right_ids, pairs, weights) -> list[int]:
    from scipy.optimize import linear_sum_assignment

    left = {v: i for i, v in enumerate(n_left_ids)}
    right = {v: j for j, v in enumerate(n_right_ids)}
    mat = np.zeros((len(left), len(right)))
    eid = -np.ones(mat.shape, dtype=np.int64)
    for e, (a, b) in enumerate(pairs):
        if a not in left:
            a, b = b, a
        if weights[e] > mat[left[a], right[b]] or eid[left[a], right[b]] < 0:
            mat[left[a], right[b]] = weights[e]
            eid[left[a], right[b]] = e
    rows, cols = linear_sum_assignment(mat, maximize=True)
    return sorted(int(eid[r, c]) for r, c in zip(rows, cols) if eid[r, c] >= 0 and mat[r, c] > 0)


def _general_matching(pairs, weights, max_edges: int) -> list[int]:
    """Branch and bound over edges in decreasing weight order."""
    cand = [e for e in range(len(pairs)) if weights[e] > 0]
    if len(cand) > max_edges:
        raise ValueError(f"general matching search is capped at {max_edges} positive edges, got {len(cand)}")
    cand.sort(key=lambda e: (-weights[e], e))
    ends = [pairs[e] for e in cand]
    wts = [float(weights[e]) for e in cand]
    k = len(cand)
    best_val = 0.0
    best_set: list[int] = []
    used: set = set()
    chosen: list[int] = []

    def bound(i: int) -> float:
        # every free vertex contributes at most half its heaviest remaining edge
        top: dict = {}
        for j in range(i, k):
            a, b = ends[j]
            if a in used or b in used:
                continue
            top[a] = max(top.get(a, 0.0), wts[j])
            top[b] = max(top.get(b, 0.0), wts[j])
        return 0.5 * sum(top.values())

    def search(i: int, val: float) -> None:
        nonlocal best_val, best_set
        if val > best_val:
            best_val, best_set = val, list(chosen)
        if i == k or val + bound(i) <= best_val + 1e-12:
            return
        a, b = ends[i]
        if a not in used and b not in used:
            used.update((a, b))
            chosen.append(i)
            search(i + 1, val + wts[i])
            chosen.pop()
            used.difference_update((a, b))
        search(i + 1, val)

    search(0, 0.0)
    return sorted(cand[i] for i in best_set)


def max_weight_matching(
    pairs: Sequence[tuple],
    weights: Sequence[float],
    bipartition: Optional[tuple[Sequence, Sequence]] = None,
    max_edges: int = MAX_GENERAL_MATCHING_EDGES,
) -> list[int]:
    """Edge ids of an exact maximum-weight matching.

    With a bipartition this is an assignment problem (any size); without
    one it is an exact branch and bound, capped at ``max_edges`` positive
    edges.
    """
    weights = np.asarray(weights, dtype=float)
    if len(pairs) == 0:
        return []
    if bipartition is not None:
        return _bipartite_matching(bipartition[0], bipartition[1], list(pairs), weights)
    return _general_matching(list(pairs), weights, max_edges)


def greedy_matching(instance: Instance) -> list[int]:
    """Maximum-weight matching under weights w*p."""
    weights = instance.w * instance.p
    pairs = [(e.u, e.v) for e in instance.edges]
    return max_weight_matching(pairs, weights, instance.bipartition)


def matching_weight(weights, edges: Sequence[int]) -> float:
    return float(np.sum(np.asarray(weights, dtype=float)[list(edges)])) if len(edges) else 0.0


def exact_alg2_value(instance: Instance, x) -> float:
    """Expected weight of ALG2: each edge is matched with probability p^2 x."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(instance.w * instance.p ** 2 * x))
